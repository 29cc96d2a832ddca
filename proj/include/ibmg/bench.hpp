#pragma once

// Experiment harness: key = value configuration files with list-valued keys
// expanded into a Cartesian sweep, CSV outputs, and field snapshots.

#include "ibmg/krylov_driver.hpp"
#include "ibmg/parallel.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <type_traits>
#include <vector>

namespace ibmg {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// 17 significant digits.
inline std::string format_17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct SweepConfig {
    std::vector<std::string> problem{"thick"};
    std::vector<int> N{64};
    std::vector<double> gamma{5.0};
    std::vector<double> mu{1.0};
    std::vector<double> rho{0.0};
    std::vector<std::string> smoother{"SC"};
    std::vector<int> box{8};
    std::vector<int> overlap{2};
    std::vector<int> nu1{1};
    std::vector<int> nu2{1};
    std::vector<int> wrap{2};
    double tol = 1e-12;
    int max_iters = 100;
    std::uint64_t seed = 1;
    double lid_speed = 1.0;
    int cheby_iters_A = 2;
    int cheby_iters_M = 2;
    std::string output_dir = "ibmg_out";

    /// Every point of the sweep, first key outermost. SC ignores the
    /// subdomain parameters, so its points carry box = overlap = 0.
    std::vector<RunConfig> expand() const;
    std::string to_text() const;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& key, std::string v)
{
    v = trim(v);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ConfigError("unterminated list for key '" + key + "'");
        v = v.substr(1, v.size() - 2);
    }
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty list element for key '" + key + "'");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError("no value for key '" + key + "'");
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& s)
{
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("invalid value '" + s + "' for key '" + key + "'");
    }
    return v;
}

template <class T>
std::vector<T> parse_numbers(const std::string& key, const std::string& v)
{
    std::vector<T> out;
    for (const auto& s : split_list(key, v)) out.push_back(parse_number<T>(key, s));
    return out;
}

template <class T>
T parse_scalar(const std::string& key, const std::string& v)
{
    const auto items = split_list(key, v);
    if (items.size() != 1) throw ConfigError("key '" + key + "' takes a single value");
    if constexpr (std::is_same_v<T, std::string>) {
        return items[0];
    }
    else {
        return parse_number<T>(key, items[0]);
    }
}

template <class T>
std::string join(const std::vector<T>& v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ", ";
        if constexpr (std::is_same_v<T, std::string>) s += v[k];
        else if constexpr (std::is_floating_point_v<T>) s += format_double(v[k]);
        else s += std::to_string(v[k]);
    }
    return s;
}

} // namespace detail

inline SweepConfig parse_config(std::istream& in)
{
    SweepConfig c;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = line.substr(eq + 1);
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
        using namespace detail;
        if (key == "problem") c.problem = split_list(key, val);
        else if (key == "N") c.N = parse_numbers<int>(key, val);
        else if (key == "gamma") c.gamma = parse_numbers<double>(key, val);
        else if (key == "mu") c.mu = parse_numbers<double>(key, val);
        else if (key == "rho") c.rho = parse_numbers<double>(key, val);
        else if (key == "smoother") c.smoother = split_list(key, val);
        else if (key == "box") c.box = parse_numbers<int>(key, val);
        else if (key == "overlap") c.overlap = parse_numbers<int>(key, val);
        else if (key == "nu1") c.nu1 = parse_numbers<int>(key, val);
        else if (key == "nu2") c.nu2 = parse_numbers<int>(key, val);
        else if (key == "wrap") c.wrap = parse_numbers<int>(key, val);
        else if (key == "tol") c.tol = parse_scalar<double>(key, val);
        else if (key == "max_iters") c.max_iters = parse_scalar<int>(key, val);
        else if (key == "seed") c.seed = parse_scalar<std::uint64_t>(key, val);
        else if (key == "lid_speed") c.lid_speed = parse_scalar<double>(key, val);
        else if (key == "cheby_iters_A") c.cheby_iters_A = parse_scalar<int>(key, val);
        else if (key == "cheby_iters_M") c.cheby_iters_M = parse_scalar<int>(key, val);
        else if (key == "output_dir") c.output_dir = parse_scalar<std::string>(key, val);
        else throw ConfigError("unknown key '" + key + "'");
    }
    // Every sweep point is validated before any run starts.
    try {
        for (const auto& rc : c.expand()) {
            if (rc.N < 8 || (rc.N & (rc.N - 1)) != 0) {
                throw ConfigError("N must be a power of two >= 8, got " + std::to_string(rc.N));
            }
            if (!(rc.gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
            rc.fluid().validate();
            if (rc.smoother != SmootherKind::SC && (rc.box < 1 || rc.N % rc.box != 0 || rc.overlap < 0)) {
                throw ConfigError("box must divide N and overlap must be >= 0");
            }
            if (rc.nu1 < 0 || rc.nu2 < 0 || rc.nu1 + rc.nu2 < 1) throw ConfigError("need nu1 + nu2 >= 1");
            if (rc.wrap < 0) throw ConfigError("wrap must be >= 0");
            rc.sc.validate();
        }
        if (!(c.tol > 0.0) || c.max_iters < 1) throw ConfigError("need tol > 0 and max_iters >= 1");
    }
    catch (const ConfigError&) {
        throw;
    }
    catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline SweepConfig parse_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_config(in);
}

inline std::vector<RunConfig> SweepConfig::expand() const
{
    std::vector<RunConfig> out;
    std::set<std::vector<std::string>> seen_sc;
    for (const auto& prob : problem)
    for (int n : N)
    for (double g : gamma)
    for (double m : mu)
    for (double r : rho)
    for (const auto& sm : smoother)
    for (int b : box)
    for (int o : overlap)
    for (int a : nu1)
    for (int z : nu2)
    for (int w : wrap) {
        RunConfig rc;
        try {
            rc.problem = parse_geometry(prob);
            rc.smoother = parse_smoother(sm);
        }
        catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        rc.N = n;
        rc.gamma = g;
        rc.mu = m;
        rc.rho = r;
        rc.box = b;
        rc.overlap = o;
        rc.nu1 = a;
        rc.nu2 = z;
        rc.wrap = w;
        rc.tol = tol;
        rc.max_iters = max_iters;
        rc.seed = seed;
        rc.lid_speed = lid_speed;
        rc.sc.cheby_iters_A = cheby_iters_A;
        rc.sc.cheby_iters_M = cheby_iters_M;
        if (rc.smoother == SmootherKind::SC) {
            rc.box = 0;
            rc.overlap = 0;
            const std::vector<std::string> key{prob, std::to_string(n), format_double(g), format_double(m),
                                               format_double(r), std::to_string(a), std::to_string(z),
                                               std::to_string(w)};
            if (!seen_sc.insert(key).second) continue;
        }
        out.push_back(rc);
    }
    return out;
}

inline std::string SweepConfig::to_text() const
{
    using detail::join;
    std::ostringstream os;
    os << "# ibmg configuration; comma-separated values (optionally in [ ]) form a sweep\n"
       << "problem = " << join(problem) << "   # thick | thin | suspension\n"
       << "N = " << join(N) << "\n"
       << "gamma = " << join(gamma) << "\n"
       << "mu = " << join(mu) << "\n"
       << "rho = " << join(rho) << "   # 0 selects Stokes flow\n"
       << "smoother = " << join(smoother) << "   # RAS | RMS | SC\n"
       << "box = " << join(box) << "\n"
       << "overlap = " << join(overlap) << "\n"
       << "nu1 = " << join(nu1) << "\n"
       << "nu2 = " << join(nu2) << "\n"
       << "wrap = " << join(wrap) << "   # FGMRES iterations per smoothing sweep\n"
       << "tol = " << format_double(tol) << "\n"
       << "max_iters = " << max_iters << "\n"
       << "seed = " << seed << "   # suspension placement\n"
       << "lid_speed = " << format_double(lid_speed) << "\n"
       << "cheby_iters_A = " << cheby_iters_A << "\n"
       << "cheby_iters_M = " << cheby_iters_M << "\n"
       << "output_dir = " << output_dir << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV

inline const char* summary_header()
{
    return "problem,N,gamma,mu,rho,smoother,box,overlap,nu1,nu2,wrap,iterations,converged,final_relres,wall_time_s";
}

inline const char* residuals_header() { return "run_id,iter,relres"; }

inline std::string summary_row(const SolveReport& r)
{
    const RunConfig& c = r.config;
    std::ostringstream os;
    os << to_string(c.problem) << ',' << c.N << ',' << format_double(c.gamma) << ',' << format_double(c.mu) << ','
       << format_double(c.rho) << ',' << to_string(c.smoother) << ',' << c.box << ',' << c.overlap << ',' << c.nu1
       << ',' << c.nu2 << ',' << c.wrap << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << ','
       << format_17(r.final_relres()) << ',' << format_double(r.wall_time);
    return os.str();
}

inline void write_summary_csv(std::ostream& os, const std::vector<SolveReport>& reports)
{
    os << summary_header() << '\n';
    for (const auto& r : reports) os << summary_row(r) << '\n';
}

inline void write_residuals_csv(std::ostream& os, const std::vector<SolveReport>& reports)
{
    os << residuals_header() << '\n';
    for (std::size_t id = 0; id < reports.size(); ++id) {
        const auto& h = reports[id].residual_history;
        for (std::size_t k = 0; k < h.size(); ++k) {
            os << id << ',' << k << ',' << format_17(h[k]) << '\n';
        }
    }
}

/// Runs every sweep point (up to `jobs` at a time) and returns the reports in
/// sweep order.
inline std::vector<SolveReport> run_sweep(const std::vector<RunConfig>& points, int jobs = 1,
                                          int smoother_threads = thread_count(),
                                          const std::function<void(std::size_t, const SolveReport&)>& on_done = {})
{
    std::vector<SolveReport> reports(points.size());
    std::mutex done_mutex;
    parallel_for(points.size(), jobs, [&](std::size_t k) {
        RunConfig rc = points[k];
        rc.threads = smoother_threads;
        StepResult res = run_step(rc);
        res.report.config.threads = 1;
        reports[k] = std::move(res.report);
        if (on_done) {
            std::lock_guard lock(done_mutex);
            on_done(k, reports[k]);
        }
    });
    return reports;
}

inline void write_outputs(const std::filesystem::path& dir, const std::vector<SolveReport>& reports)
{
    std::filesystem::create_directories(dir);
    std::ofstream s(dir / "summary.csv");
    std::ofstream r(dir / "residuals.csv");
    if (!s || !r) throw std::runtime_error("cannot write CSV outputs in '" + dir.string() + "'");
    write_summary_csv(s, reports);
    write_residuals_csv(r, reports);
    if (!s || !r) throw std::runtime_error("I/O error writing CSV outputs in '" + dir.string() + "'");
}

// ---------------------------------------------------------------------------
// Snapshots
//
//   u1.csv     i,j,x,y,u1        faces (i h, (j + 1/2) h), i = 0..N, j = 0..N-1
//   u2.csv     i,j,x,y,u2        faces ((i + 1/2) h, j h), i = 0..N-1, j = 0..N
//   p.csv      i,j,x,y,p         cell centres, mean-zero pressure
//   nodes.csv  fiber,node,x,y,x_new,y_new   positions before and after the step
//
// Wall values of u1/u2 are the boundary data (the lid on the top row of u1 is
// not a face and is not written). All reals have 17 significant digits.

struct Snapshot {
    int N = 0;
    std::vector<double> u1; // (N + 1) * N, index j * (N + 1) + i
    std::vector<double> u2; // N * (N + 1), index j * N + i
    std::vector<double> p;  // N * N, index j * N + i
    std::vector<int> fiber;
    std::vector<double> X;     // interleaved x, y
    std::vector<double> X_new; // interleaved x, y
};

inline Snapshot make_snapshot(const StepProblem& prob, const StepResult& res)
{
    const auto& lv = prob.finest();
    const int n = lv.n();
    Snapshot s;
    s.N = n;
    s.u1.resize(std::size_t(n + 1) * n);
    s.u2.resize(std::size_t(n) * (n + 1));
    s.p.resize(std::size_t(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= n; ++i) s.u1[std::size_t(j) * (n + 1) + i] = res.w[lv.u1(i, j)];
    }
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) s.u2[std::size_t(j) * n + i] = res.w[lv.u2(i, j)];
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) s.p[std::size_t(j) * n + i] = res.w[lv.p(i, j)];
    }
    for (std::size_t f = 0; f < prob.meshes.size(); ++f) {
        for (std::size_t k = 0; k < prob.meshes[f].n_nodes(); ++k) s.fiber.push_back(int(f));
    }
    s.X = gather_positions(std::span<const FiberMesh>(prob.meshes));
    s.X_new = res.X;
    return s;
}

inline void write_snapshot(const std::filesystem::path& dir, const Snapshot& s)
{
    std::filesystem::create_directories(dir);
    const int n = s.N;
    const double h = 1.0 / n;
    const auto open = [&](const char* name, const char* header) {
        std::ofstream os(dir / name);
        if (!os) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
        os << header << '\n';
        return os;
    };
    {
        auto os = open("u1.csv", "i,j,x,y,u1");
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i <= n; ++i) {
                os << i << ',' << j << ',' << format_17(i * h) << ',' << format_17((j + 0.5) * h) << ','
                   << format_17(s.u1[std::size_t(j) * (n + 1) + i]) << '\n';
            }
        }
    }
    {
        auto os = open("u2.csv", "i,j,x,y,u2");
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i < n; ++i) {
                os << i << ',' << j << ',' << format_17((i + 0.5) * h) << ',' << format_17(j * h) << ','
                   << format_17(s.u2[std::size_t(j) * n + i]) << '\n';
            }
        }
    }
    {
        auto os = open("p.csv", "i,j,x,y,p");
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                os << i << ',' << j << ',' << format_17((i + 0.5) * h) << ',' << format_17((j + 0.5) * h) << ','
                   << format_17(s.p[std::size_t(j) * n + i]) << '\n';
            }
        }
    }
    {
        auto os = open("nodes.csv", "fiber,node,x,y,x_new,y_new");
        std::size_t node = 0;
        for (std::size_t k = 0; k < s.fiber.size(); ++k) {
            if (k > 0 && s.fiber[k] != s.fiber[k - 1]) node = 0;
            os << s.fiber[k] << ',' << node++ << ',' << format_17(s.X[2 * k]) << ',' << format_17(s.X[2 * k + 1])
               << ',' << format_17(s.X_new[2 * k]) << ',' << format_17(s.X_new[2 * k + 1]) << '\n';
        }
    }
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const std::string& header)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw std::runtime_error("unexpected header in '" + path.string() + "'");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline double to_double(const std::string& s)
{
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

} // namespace detail

inline Snapshot read_snapshot(const std::filesystem::path& dir)
{
    Snapshot s;
    const auto p = detail::read_csv(dir / "p.csv", "i,j,x,y,p");
    const auto n = int(std::lround(std::sqrt(double(p.size()))));
    if (std::size_t(n) * n != p.size() || n == 0) throw std::runtime_error("p.csv is not a square grid");
    s.N = n;
    const auto fill = [](const std::vector<std::vector<std::string>>& rows, std::vector<double>& out, int stride) {
        for (const auto& r : rows) {
            if (r.size() != 5) throw std::runtime_error("malformed snapshot row");
            const std::size_t k = std::size_t(std::stoi(r[1])) * std::size_t(stride) + std::size_t(std::stoi(r[0]));
            if (k >= out.size()) throw std::runtime_error("snapshot index out of range");
            out[k] = detail::to_double(r[4]);
        }
    };
    s.p.resize(std::size_t(n) * n);
    fill(p, s.p, n);
    s.u1.resize(std::size_t(n + 1) * n);
    fill(detail::read_csv(dir / "u1.csv", "i,j,x,y,u1"), s.u1, n + 1);
    s.u2.resize(std::size_t(n) * (n + 1));
    fill(detail::read_csv(dir / "u2.csv", "i,j,x,y,u2"), s.u2, n);
    for (const auto& r : detail::read_csv(dir / "nodes.csv", "fiber,node,x,y,x_new,y_new")) {
        if (r.size() != 6) throw std::runtime_error("malformed nodes row");
        s.fiber.push_back(std::stoi(r[0]));
        s.X.push_back(detail::to_double(r[2]));
        s.X.push_back(detail::to_double(r[3]));
        s.X_new.push_back(detail::to_double(r[4]));
        s.X_new.push_back(detail::to_double(r[5]));
    }
    return s;
}

} // namespace ibmg
