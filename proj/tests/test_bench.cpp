#include "ibmg/bench.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace ibmg;

namespace {

SweepConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("ibmg_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Summary CSV without the wall-clock column.
std::string without_wall_time(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

} // namespace

TEST(Config, ParsesListsCommentsAndScalars)
{
    const SweepConfig c = parse("# sweep\n"
                                "problem = thick, thin\n"
                                "N = [16, 32]   # two grids\n"
                                "gamma = 5\n"
                                "smoother = RAS\n"
                                "tol = 1e-10\n"
                                "output_dir = out/x\n");
    EXPECT_EQ(c.problem, (std::vector<std::string>{"thick", "thin"}));
    EXPECT_EQ(c.N, (std::vector<int>{16, 32}));
    EXPECT_EQ(c.gamma, (std::vector<double>{5.0}));
    EXPECT_EQ(c.tol, 1e-10);
    EXPECT_EQ(c.output_dir, "out/x");
    const auto pts = c.expand();
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts[0].problem, Geometry::thick);
    EXPECT_EQ(pts[0].N, 16);
    EXPECT_EQ(pts[1].N, 32);
    EXPECT_EQ(pts[2].problem, Geometry::thin);
    EXPECT_EQ(pts[3].tol, 1e-10);
}

TEST(Config, SweepCardinality)
{
    const SweepConfig c = parse("problem = thick\nN = [64, 128]\ngamma = [5]\nmu = [1]\nrho = 0\nsmoother = SC\n");
    EXPECT_EQ(c.expand().size(), 2u);
}

TEST(Config, SchurPointsIgnoreSubdomainKeys)
{
    const SweepConfig c = parse("smoother = SC, RAS\nbox = 4, 8\noverlap = 0, 2\n");
    const auto pts = c.expand();
    ASSERT_EQ(pts.size(), 5u);
    EXPECT_EQ(pts[0].smoother, SmootherKind::SC);
    EXPECT_EQ(pts[0].box, 0);
    EXPECT_EQ(pts[0].overlap, 0);
    for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_EQ(pts[k].smoother, SmootherKind::RAS);
}

TEST(Config, RejectsInvalidInput)
{
    EXPECT_THROW(parse("N = 12\n"), ConfigError);
    EXPECT_THROW(parse("N = 64\nN = 32\n"), ConfigError);
    EXPECT_THROW(parse("colour = red\n"), ConfigError);
    EXPECT_THROW(parse("N 64\n"), ConfigError);
    EXPECT_THROW(parse("gamma = five\n"), ConfigError);
    EXPECT_THROW(parse("smoother = Vanka\n"), ConfigError);
    EXPECT_THROW(parse("problem = blob\n"), ConfigError);
    EXPECT_THROW(parse("mu = 0\n"), ConfigError);
    EXPECT_THROW(parse("smoother = RAS\nbox = 6\n"), ConfigError);
    EXPECT_THROW(parse("nu1 = 0\nnu2 = 0\n"), ConfigError);
    EXPECT_THROW(parse("N = [64\n"), ConfigError);
    EXPECT_THROW(parse("tol = 1e-12, 1e-10\n"), ConfigError);
    EXPECT_THROW(parse_config_file("/nonexistent/ibmg.cfg"), ConfigError);
}

TEST(Config, PrintedDefaultsRoundTrip)
{
    const SweepConfig d;
    const SweepConfig c = parse(d.to_text());
    EXPECT_EQ(c.to_text(), d.to_text());
    ASSERT_EQ(c.expand().size(), 1u);
    const RunConfig r = c.expand()[0];
    EXPECT_EQ(r.N, 64);
    EXPECT_EQ(r.smoother, SmootherKind::SC);
    EXPECT_EQ(r.wrap, 2);
}

TEST(Csv, GoldenHeaders)
{
    EXPECT_STREQ(summary_header(),
                 "problem,N,gamma,mu,rho,smoother,box,overlap,nu1,nu2,wrap,iterations,converged,final_relres,wall_time_s");
    EXPECT_STREQ(residuals_header(), "run_id,iter,relres");
}

TEST(Csv, RowsEchoConfiguration)
{
    SolveReport r;
    r.config.problem = Geometry::thin;
    r.config.N = 32;
    r.config.gamma = 500;
    r.config.mu = 0.01;
    r.config.rho = 1;
    r.config.smoother = SmootherKind::RMS;
    r.config.box = 8;
    r.config.overlap = 4;
    r.iterations = 2;
    r.residual_history = {1.0, 0.5, 0.25};
    r.converged = false;
    r.wall_time = 0.5;
    EXPECT_EQ(summary_row(r), "thin,32,500,0.01,1,RMS,8,4,1,1,2,2,false,0.25,0.5");
    std::ostringstream os;
    write_residuals_csv(os, {r, r});
    EXPECT_EQ(os.str(), "run_id,iter,relres\n0,0,1\n0,1,0.5\n0,2,0.25\n1,0,1\n1,1,0.5\n1,2,0.25\n");
}

TEST(Sweep, DeterministicAcrossRunsAndThreads)
{
    const auto pts = parse("problem = thick\nN = 32\ngamma = 50\nsmoother = RAS, SC\n").expand();
    const auto a = run_sweep(pts, 1, 1), b = run_sweep(pts, 2, 4);
    std::ostringstream sa, sb, ra, rb;
    write_summary_csv(sa, a);
    write_summary_csv(sb, b);
    write_residuals_csv(ra, a);
    write_residuals_csv(rb, b);
    EXPECT_EQ(without_wall_time(sa.str()), without_wall_time(sb.str()));
    EXPECT_EQ(ra.str(), rb.str());
    for (const auto& r : a) EXPECT_TRUE(r.converged);
}

TEST(Snapshot, RoundTripIsBitwise)
{
    RunConfig c;
    c.problem = Geometry::suspension;
    c.N = 32;
    c.gamma = 5.0;
    const StepProblem prob(c);
    const StepResult res = semi_implicit_step(prob);
    const Snapshot s = make_snapshot(prob, res);
    const auto dir = scratch_dir("snapshot");
    write_snapshot(dir, s);
    const Snapshot t = read_snapshot(dir);
    EXPECT_EQ(t.N, s.N);
    EXPECT_EQ(t.u1, s.u1);
    EXPECT_EQ(t.u2, s.u2);
    EXPECT_EQ(t.p, s.p);
    EXPECT_EQ(t.fiber, s.fiber);
    EXPECT_EQ(t.X, s.X);
    EXPECT_EQ(t.X_new, s.X_new);
    EXPECT_EQ(slurp(dir / "u1.csv").substr(0, 11), "i,j,x,y,u1\n");
    EXPECT_EQ(slurp(dir / "u2.csv").substr(0, 11), "i,j,x,y,u2\n");
    EXPECT_EQ(slurp(dir / "p.csv").substr(0, 10), "i,j,x,y,p\n");
    EXPECT_EQ(slurp(dir / "nodes.csv").substr(0, 27), "fiber,node,x,y,x_new,y_new\n");
    EXPECT_EQ(t.fiber.back(), 15);
}

TEST(Snapshot, ShellPressureJump)
{
    RunConfig c;
    c.problem = Geometry::thick;
    c.N = 64;
    c.gamma = 5.0;
    c.lid_speed = 0.0;
    const StepProblem prob(c);
    const Snapshot s = make_snapshot(prob, semi_implicit_step(prob));
    double in = 0.0, out = 0.0;
    int nin = 0, nout = 0;
    for (int j = 0; j < s.N; ++j)
        for (int i = 0; i < s.N; ++i) {
            const double r = std::hypot((i + 0.5) / s.N - 0.5, (j + 0.5) / s.N - 0.5);
            const double p = s.p[std::size_t(j) * s.N + i];
            if (r < 0.2) {
                in += p;
                ++nin;
            }
            else if (r > 0.36) {
                out += p;
                ++nout;
            }
        }
    // The contracting shell pressurizes its interior.
    EXPECT_GT(in / nin - out / nout, 1.0);
}

TEST(Cli, PrintConfigRunAndErrors)
{
    const std::string cli = IBMG_CLI_PATH;
    const auto dir = scratch_dir("cli");
    const auto cfg = dir / "sweep.cfg";
    {
        std::ofstream os(cfg);
        os << "problem = thick\nN = 16, 32\ngamma = 5\nsmoother = RMS\nbox = 8\noverlap = 2\n";
    }
    ASSERT_EQ(std::system((cli + " print-config > " + (dir / "defaults.cfg").string()).c_str()), 0);
    EXPECT_EQ(slurp(dir / "defaults.cfg"), SweepConfig{}.to_text());

    for (const char* run : {"a", "b"}) {
        const std::string cmd = cli + " run " + cfg.string() + " --output-dir " + (dir / run).string() + " 2> /dev/null";
        ASSERT_EQ(std::system(cmd.c_str()), 0);
    }
    const std::string summary = slurp(dir / "a" / "summary.csv");
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 3);
    EXPECT_EQ(without_wall_time(summary), without_wall_time(slurp(dir / "b" / "summary.csv")));
    EXPECT_EQ(slurp(dir / "a" / "residuals.csv"), slurp(dir / "b" / "residuals.csv"));

    const std::string snap = cli + " snapshot " + cfg.string() + " --point 1 --output-dir " + (dir / "snap").string() +
                             " 2> /dev/null";
    ASSERT_EQ(std::system(snap.c_str()), 0);
    EXPECT_EQ(read_snapshot(dir / "snap").N, 32);

    const auto bad = dir / "bad.cfg";
    {
        std::ofstream os(bad);
        os << "N = 12\n";
    }
    const int status = std::system((cli + " run " + bad.string() + " 2> /dev/null").c_str());
    EXPECT_NE(status, 0);
    EXPECT_EQ(WEXITSTATUS(status), 2);
}
