#include "cfphase/config.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

using namespace cfphase;

namespace {

std::vector<std::string> errors_of(std::string_view text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.messages();
    }
    return {};
}

bool contains(const std::vector<std::string>& msgs, const std::string& needle)
{
    return std::any_of(msgs.begin(), msgs.end(),
                       [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

} // namespace

TEST(Config, EmptyDocumentGivesDefaults)
{
    const auto cfg = parse_config("");
    EXPECT_EQ(cfg.cells, 200);
    EXPECT_EQ(cfg.params.kappa, 0.1);
    EXPECT_EQ(cfg.solver.snapshot_interval, 0.01);
    EXPECT_EQ(cfg.profile, ProfileKind::SmoothedStep);
    EXPECT_EQ(cfg.output_dir, "out");
    ASSERT_EQ(cfg.echo.size(), config_keys().size() - 3);
    EXPECT_EQ(cfg.echo.front().first, "c");
}

TEST(Config, ReadsValuesAndComments)
{
    const auto cfg = parse_config(R"(# leading comment
kappa = 0.05   # trailing comment
   N = 64
coupling = picard
picard_sweeps = 3
initial_profile = sine
kappas = 0.4, 0.2 ,0.1
body_force = sine
body_force_vector = 1, 0, 0.5
)");
    EXPECT_EQ(cfg.params.kappa, 0.05);
    EXPECT_EQ(cfg.cells, 64);
    EXPECT_EQ(cfg.solver.coupling, CouplingMode::Picard);
    EXPECT_EQ(cfg.solver.picard_sweeps, 3);
    EXPECT_EQ(cfg.profile, ProfileKind::Sine);
    EXPECT_EQ(cfg.kappas, (std::vector<double>{0.4, 0.2, 0.1}));
    EXPECT_EQ(cfg.body_force.kind, "sine");
    EXPECT_EQ(cfg.body_force.vector(2), 0.5);
    EXPECT_EQ(cfg.initial_data().size(), 65u);
}

TEST(Config, KappaOutOfRange)
{
    const auto msgs = errors_of("kappa = 1.5\n");
    ASSERT_EQ(msgs.size(), 1u);
    EXPECT_EQ(msgs[0], "line 1: kappa: kappa must lie in (0,1]");
}

TEST(Config, GridTooSmall)
{
    const auto msgs = errors_of("\nN = 3\n");
    ASSERT_EQ(msgs.size(), 1u);
    EXPECT_EQ(msgs[0], "line 2: N: minimum grid size is 4 cells, got 3");
}

TEST(Config, AllProblemsReportedTogether)
{
    const auto msgs = errors_of("colour = blue\nnu = fast\nnu = 2\nN = 3.5\nkappas = 0.1, 0.2\nnot a pair\n");
    EXPECT_TRUE(contains(msgs, "line 1: unknown key 'colour'"));
    EXPECT_TRUE(contains(msgs, "duplicate key 'nu'"));
    EXPECT_TRUE(contains(msgs, "N: expected an integer"));
    EXPECT_TRUE(contains(msgs, "strictly decreasing"));
    EXPECT_TRUE(contains(msgs, "line 6: expected 'key = value'"));
    EXPECT_GE(msgs.size(), 5u);
}

TEST(Config, PolynomialPotential)
{
    const auto cfg = parse_config("potential = polynomial\npotential_coeffs = 0, 0, 1, -2, 1\n"
                                  "potential_wells = 0, 0.5, 1\n");
    EXPECT_NEAR(cfg.params.potential.value(0.5), 1.0 / 16.0, 1e-15);
    EXPECT_TRUE(contains(errors_of("potential_coeffs = 1, 2\n"), "only valid with potential = polynomial"));
    EXPECT_TRUE(contains(errors_of("potential = polynomial\n"), "needs potential_coeffs"));
}

TEST(Config, ElasticTensorAndLameAreExclusive)
{
    std::string identity = "elastic_tensor = ";
    for (int k = 0; k < 36; ++k)
        identity += (k ? "," : "") + std::string(k % 7 == 0 ? "1" : "0");
    const auto cfg = parse_config(identity + "\n");
    EXPECT_EQ(cfg.params.stiffness.mandel()(3, 3), 1.0);
    EXPECT_TRUE(contains(errors_of(identity + "\nlame_mu = 2\n"), "cannot be combined"));
    EXPECT_TRUE(contains(errors_of("elastic_tensor = 1, 2\n"), "expected 36 numbers"));
    EXPECT_TRUE(contains(errors_of("lame_mu = 0\n"), "positive definite"));
}

TEST(Config, EchoRoundTrips)
{
    const auto cfg = parse_config("kappa = 0.123456789012345678\nt_end = 0.5\n");
    std::string text;
    for (const auto& [k, v] : cfg.echo)
        text += k + " = " + v + "\n";
    const auto again = parse_config(text);
    EXPECT_EQ(again.params.kappa, cfg.params.kappa);
    EXPECT_EQ(again.echo, cfg.echo);
}

TEST(Config, FormatNumberIsShortestRoundTrip)
{
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(2.0), "2");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Config, LoadFromFile)
{
    const auto path = std::filesystem::temp_directory_path() / "cfphase_config_test.cfg";
    {
        std::ofstream out(path);
        out << "N = 32\n";
    }
    EXPECT_EQ(load_config(path).cells, 32);
    std::filesystem::remove(path);
    EXPECT_THROW(load_config(path), std::ios_base::failure);
}
