#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "plcsim/channel.hpp"
#include "test_support.hpp"

using namespace plcsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void expect_complex_near(Complex actual, Complex expected, double tol) {
  EXPECT_NEAR(actual.real(), expected.real(), tol);
  EXPECT_NEAR(actual.imag(), expected.imag(), tol);
}

void expect_abcd_near(const Abcd& a, const Abcd& b, double tol) {
  expect_complex_near(a.a, b.a, tol);
  expect_complex_near(a.b, b.b, tol);
  expect_complex_near(a.c, b.c, tol);
  expect_complex_near(a.d, b.d, tol);
}

// 50 ohm air-like line.
const CableType kLossless{0.0, 1e6, 250e-9, 0.0, 100e-12};

// R/L = G/C at f0, so Z0 = sqrt(L/C) = 50 ohm and alpha = sqrt(R*G) there.
const CableType kDistortionless{0.05, 10e6, 250e-9, 0.05 * 100e-12 / 250e-9, 100e-12};

/// CCo (node 0) connected to one house (node 1) by a single segment.
PowerGrid two_node_grid(double length_m, const std::string& cable, double house_load = kInf) {
  PowerGrid grid;
  grid.nodes = {{0, NodeKind::Cco, 0, 0, -1, kInf}, {1, NodeKind::House, 0, 0, 0, house_load}};
  grid.segments = {{0, 1, length_m, cable, 0}};
  grid.house_of_cell = {1};
  grid.sector_of = {0};
  return grid;
}

/// One-bin grid centred on f_hz.
FrequencyGrid single_bin(double f_hz) { return {f_hz - 1.0, f_hz + 1.0, 1}; }

}  // namespace

TEST(Rlgc, ReferenceAndScalingLaws) {
  const CableType cable{2e-3, 1e6, 0.3e-6, 4e-9, 0.15e-9};
  const Rlgc at_f0 = rlgc_at(cable, 1e6);
  EXPECT_DOUBLE_EQ(at_f0.r_ohm_per_m, 2e-3);
  EXPECT_DOUBLE_EQ(at_f0.l_h_per_m, 0.3e-6);
  EXPECT_DOUBLE_EQ(at_f0.g_s_per_m, 4e-9);
  EXPECT_DOUBLE_EQ(at_f0.c_f_per_m, 0.15e-9);
  EXPECT_DOUBLE_EQ(rlgc_at(cable, 4e6).r_ohm_per_m, 4e-3);
  EXPECT_DOUBLE_EQ(rlgc_at(cable, 0.25e6).g_s_per_m, 1e-9);
  EXPECT_THROW(rlgc_at(cable, 0.0), DomainError);
  EXPECT_THROW(rlgc_at(cable, -1.0), DomainError);
}

TEST(SecondaryParams, LosslessLineIsFiftyOhm) {
  const LineParams lp = line_params(kLossless, 30e6);
  EXPECT_NEAR(lp.z0.real(), 50.0, 1e-12);
  EXPECT_NEAR(lp.z0.imag(), 0.0, 1e-12);
  EXPECT_EQ(lp.gamma.real(), 0.0);
  EXPECT_NEAR(lp.gamma.imag(), 2 * std::numbers::pi * 30e6 * std::sqrt(250e-9 * 100e-12), 1e-12);
}

TEST(SecondaryParams, DistortionlessAttenuation) {
  const Rlgc p = rlgc_at(kDistortionless, kDistortionless.f0_hz);
  const LineParams lp = secondary_params(p, kDistortionless.f0_hz);
  EXPECT_NEAR(lp.gamma.real(), std::sqrt(p.r_ohm_per_m * p.g_s_per_m), 1e-15);
  EXPECT_NEAR(lp.z0.real(), 50.0, 1e-10);
  EXPECT_NEAR(lp.z0.imag(), 0.0, 1e-10);
}

TEST(SecondaryParams, PassiveBranchForRandomCables) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const CableType cable{rng.uniform(0, 1e-1), rng.uniform(1e5, 1e7), rng.uniform(1e-8, 1e-5), rng.uniform(0, 1e-6),
                          rng.uniform(1e-12, 1e-9)};
    const double f = rng.uniform(1e3, 1e9);
    const LineParams lp = line_params(cable, f);
    EXPECT_GE(lp.gamma.real(), 0.0);
    EXPECT_GE(lp.z0.real(), 0.0);
    // Z0 * gamma recovers the series impedance R + jwL.
    const Rlgc p = rlgc_at(cable, f);
    const Complex series(p.r_ohm_per_m, 2 * std::numbers::pi * f * p.l_h_per_m);
    EXPECT_LT(std::abs(lp.z0 * lp.gamma - series) / std::abs(series), 1e-12);
  }
}

TEST(AbcdLine, ZeroLengthIsIdentity) {
  const auto two_port = abcd_line(default_cables().at("drop"), FrequencyGrid{}, 0.0);
  for (const auto& m : two_port.points) EXPECT_EQ(m, Abcd{});
}

TEST(AbcdLine, LosslessQuarterWave) {
  const double f = 25e6;
  const LineParams lp = line_params(kLossless, f);
  const double quarter = (std::numbers::pi / 2) / lp.gamma.imag();
  const Abcd m = abcd_line(lp, quarter);
  expect_abcd_near(m, Abcd{0.0, Complex(0, 50.0), Complex(0, 1.0 / 50.0), 0.0}, 1e-12);
}

TEST(AbcdLine, HalvesCascadeToWhole) {
  const FrequencyGrid fgrid;
  for (const auto& [key, cable] : default_cables()) {
    const auto half = abcd_line(cable, fgrid, 60.0);
    const auto whole = abcd_line(cable, fgrid, 120.0);
    const TwoPortAbcd parts[] = {half, half};
    const auto joined = cascade(parts, fgrid);
    for (std::size_t k = 0; k < fgrid.n_points; ++k) {
      expect_abcd_near(joined.points[k], whole.points[k], 1e-12);
      EXPECT_NEAR(std::abs(whole.points[k].det() - 1.0), 0.0, 1e-10);
    }
  }
}

TEST(AbcdLine, OverflowGuard) {
  const LineParams lp{Complex(50, 0), Complex(1.0, 1.0)};
  EXPECT_NO_THROW(abcd_line(lp, 699.0));
  EXPECT_THROW(abcd_line(lp, 701.0), std::overflow_error);
  EXPECT_THROW(abcd_line(lp, -1.0), DomainError);
}

TEST(AbcdShunt, Examples) {
  EXPECT_EQ(abcd_shunt(Complex(kInf, 0.0)), Abcd{});
  const Abcd m = abcd_shunt(Complex(50.0, 0.0));
  EXPECT_DOUBLE_EQ(m.c.real(), 0.02);
  EXPECT_EQ(m.det(), Complex(1.0, 0.0));
  EXPECT_EQ(abcd_shunt(Complex(13.0, -7.0)).det(), Complex(1.0, 0.0));
  EXPECT_THROW(abcd_shunt(Complex(0.0, 0.0)), SingularLoadError);
}

TEST(Cascade, IdentityAndAssociativity) {
  const FrequencyGrid fgrid{2e6, 86e6, 64};
  EXPECT_EQ(cascade({}, fgrid).points, std::vector<Abcd>(64));

  const auto cables = default_cables();
  const auto a = abcd_line(cables.at("backbone"), fgrid, 37.0);
  const auto b = abcd_shunt(Complex(50.0, 5.0), fgrid);
  const auto c = abcd_line(cables.at("drop"), fgrid, 11.0);
  const TwoPortAbcd just_a[] = {a};
  EXPECT_EQ(cascade(just_a, fgrid).points, a.points);

  const TwoPortAbcd bc_list[] = {b, c};
  const TwoPortAbcd a_bc[] = {a, cascade(bc_list, fgrid)};
  const TwoPortAbcd ab_list[] = {a, b};
  const TwoPortAbcd ab_c[] = {cascade(ab_list, fgrid), c};
  const auto left = cascade(a_bc, fgrid);
  const auto right = cascade(ab_c, fgrid);
  for (std::size_t k = 0; k < fgrid.n_points; ++k) {
    expect_abcd_near(left.points[k], right.points[k], 1e-12);
    EXPECT_NEAR(std::abs(left.points[k].det() - 1.0), 0.0, 1e-10);
  }
}

TEST(Cascade, RejectsMismatchedGrids) {
  const FrequencyGrid g1{2e6, 86e6, 64};
  const FrequencyGrid g2{2e6, 86e6, 32};
  const TwoPortAbcd ports[] = {TwoPortAbcd::identity(g1), TwoPortAbcd::identity(g2)};
  EXPECT_THROW(cascade(ports, g1), ShapeError);
}

TEST(InputImpedance, AnalyticCases) {
  const auto cable = default_cables().at("backbone");
  for (double f : {2e6, 30e6, 86e6}) {
    const LineParams lp = line_params(cable, f);
    for (double len : {0.5, 20.0, 400.0}) {
      expect_complex_near(input_impedance(lp, len, lp.z0), lp.z0, 1e-9);
    }
    expect_complex_near(input_impedance(lp, 0.0, Complex(33.0, -4.0)), Complex(33.0, -4.0), 1e-12);
  }
  const LineParams lossless = line_params(kLossless, 25e6);
  const double quarter = (std::numbers::pi / 2) / lossless.gamma.imag();
  EXPECT_LT(std::abs(input_impedance(lossless, quarter, Complex(kInf, 0.0))), 1e-9);
  // Open stub: Z0 / tanh agrees with a very large finite termination.
  const LineParams lp = line_params(cable, 10e6);
  expect_complex_near(input_impedance(lp, 7.0, Complex(kInf, 0.0)), input_impedance(lp, 7.0, Complex(1e15, 0.0)),
                      1e-6);
}

TEST(AverageChannelGain, Examples) {
  EXPECT_DOUBLE_EQ(average_channel_gain(std::vector<Complex>(8, Complex(1.0, 0.0))), 0.0);
  EXPECT_NEAR(average_channel_gain(std::vector<Complex>(8, Complex(0.0, 0.5))), -6.0206, 1e-4);
  const std::vector<Complex> mixed{1.0, 0.0, 1.0, 0.0};
  EXPECT_NEAR(average_channel_gain(mixed), -3.0103, 1e-4);
  EXPECT_THROW(average_channel_gain(std::vector<Complex>{}), DomainError);
}

TEST(PathTransfer, MatchedLosslessLineHasUnitGain) {
  const CableCatalog cables{{"air", kLossless}};
  const PortImpedances ports{Complex(0.0, 0.0), Complex(50.0, 0.0)};
  const auto response = path_transfer(two_node_grid(137.0, "air", 50.0), 0, cables, FrequencyGrid{}, ports);
  for (const auto& h : response.h) EXPECT_NEAR(std::abs(h), 1.0, 1e-12);
  EXPECT_NEAR(response.acg_db, 0.0, 1e-10);
}

TEST(PathTransfer, MatchedLossyLineAttenuatesExponentially) {
  const CableCatalog cables{{"dl", kDistortionless}};
  const PortImpedances ports{Complex(0.0, 0.0), Complex(50.0, 0.0)};
  const FrequencyGrid fgrid = single_bin(kDistortionless.f0_hz);
  const double alpha = std::sqrt(kDistortionless.r0_ohm_per_m * kDistortionless.g0_s_per_m);
  double previous_acg = 1.0;
  for (double len : {1.0, 10.0, 50.0, 200.0, 800.0}) {
    const auto response = path_transfer(two_node_grid(len, "dl"), 0, cables, fgrid, ports);
    EXPECT_NEAR(std::abs(response.h[0]), std::exp(-alpha * len), 1e-9);
    EXPECT_LT(response.acg_db, previous_acg);
    previous_acg = response.acg_db;
  }
}

TEST(PathTransfer, OpaqueSegmentGivesZeroTransfer) {
  const CableType lossy{50.0, 1e6, 1e-6, 0.0, 1e-10};
  const CableCatalog cables{{"x", lossy}};
  const FrequencyGrid fgrid{1e6, 2e6, 4};
  const auto response = path_transfer(two_node_grid(1e5, "x", 50.0), 0, cables, fgrid, PortImpedances{});
  for (const auto& h : response.h) EXPECT_EQ(h, Complex(0.0, 0.0));
}

TEST(PathTransfer, ErrorsAndDeterminism) {
  const auto cables = default_cables();
  const auto grid = two_node_grid(50.0, "drop", 50.0);
  EXPECT_THROW(path_transfer(grid, 1, cables, FrequencyGrid{}, PortImpedances{}), LookupError);
  EXPECT_THROW(path_transfer(grid, -1, cables, FrequencyGrid{}, PortImpedances{}), LookupError);
  EXPECT_THROW(path_transfer(two_node_grid(5.0, "nope"), 0, cables, FrequencyGrid{}, PortImpedances{}), LookupError);

  Rng rng(5);
  const auto tree = support::random_tree(rng, 10);
  const auto a = path_transfer(tree, 0, cables, FrequencyGrid{}, PortImpedances{});
  const auto b = path_transfer(tree, 0, cables, FrequencyGrid{}, PortImpedances{});
  EXPECT_EQ(a.h, b.h);
  EXPECT_EQ(a.acg_db, b.acg_db);
}

TEST(PathTransfer, BatchMatchesSingleCellCalls) {
  Rng rng(77);
  const Deployment d = generate_deployment(Territory{}, 0.2, HouseLoad{}, rng);
  const auto grid = build_power_grid(d, GridParams{});
  const auto cables = default_cables();
  const FrequencyGrid fgrid{2e6, 86e6, 64};
  std::vector<int> ids{3, 0, 17};
  const auto batch = path_transfers(grid, ids, cables, fgrid, PortImpedances{});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EXPECT_EQ(batch[i].h, path_transfer(grid, ids[i], cables, fgrid, PortImpedances{}).h);
  }
}

TEST(ResponseCsv, HeaderAndRows) {
  const FrequencyGrid fgrid{1e6, 3e6, 2};
  ChannelResponse r{{Complex(0.5, -0.25), Complex(1.0, 0.0)}, 0.0};
  std::ostringstream os;
  write_response_csv(os, fgrid, r);
  EXPECT_EQ(os.str(), "f_hz,re_h,im_h\n1500000,0.5,-0.25\n2500000,1,0\n");
}
