#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "ncg/fredholm.hpp"

using namespace ncg;
using cplx = std::complex<double>;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::Message;

namespace {

DenseOperator random_dense(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return DenseOperator{m};
}

// Involutive module with a scalar defect: F = alpha * diag(+-1), so that
// 1 - F^2 = (1 - alpha^2) * id commutes with everything.
FredholmModule scalar_defect_module(double alpha, int n) {
  Eigen::VectorXcd sgn(n);
  for (int i = 0; i < n; ++i) sgn(i) = (i % 2 == 0) ? 1.0 : -1.0;
  FredholmModule m;
  m.F = DenseOperator{(alpha * sgn).asDiagonal().toDenseMatrix()};
  m.defect =
      DenseOperator{Eigen::MatrixXcd::Identity(n, n) * (1.0 - alpha * alpha)};
  m.parity = Parity::odd;
  m.p = 1.0;
  return m;
}

}  // namespace

TEST_CASE("bounded transform of the circle Dirac") {
  SpectralTriple t = build_circle_dirac();
  FredholmModule m = fredholm_module(t);
  REQUIRE(m.parity == Parity::odd);
  const BandOperator& F = as_band(m.F);
  for (std::int64_t n : {-37, -5, -1, 0, 1, 2, 64}) {
    double want = double(n) / std::sqrt(1.0 + double(n) * double(n));
    REQUIRE(F.entry(n, n).real() == Approx(want).margin(1e-15));
    REQUIRE(F.entry(n, n).imag() == 0.0);
  }
  REQUIRE(F.entry(3, 4) == cplx{0.0});
}

TEST_CASE("bounded transform of a finite even triple") {
  Eigen::MatrixXcd pm(1, 2);
  pm << 1.0, 0.0;
  SpectralTriple t = build_finite_even(2, 1, DenseOperator{pm}, {});
  FredholmModule m = fredholm_module(t);
  REQUIRE(m.parity == Parity::even);

  const Eigen::MatrixXcd& d = as_dense(m.defect).m;
  // 1 - F^2 = (1 + D^2)^{-1} for the smooth cutoff used here
  Eigen::MatrixXcd dd = as_dense(t.D).m;
  Eigen::MatrixXcd want =
      (Eigen::MatrixXcd::Identity(3, 3) + dd * dd).inverse();
  REQUIRE((d - want).norm() < 1e-12);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d);
  REQUIRE(svd.singularValues()(2) > 1e-3);  // full rank: nothing is exactly flat
}

TEST_CASE("zero Dirac operator gives the trivial transform") {
  SpectralTriple t =
      build_finite_even(1, 1, DenseOperator{Eigen::MatrixXcd::Zero(1, 1)}, {});
  FredholmModule m = fredholm_module(t);
  REQUIRE(as_dense(m.F).m.norm() == 0.0);
  REQUIRE((as_dense(m.defect).m - Eigen::MatrixXcd::Identity(2, 2)).norm() ==
          0.0);
}

TEST_CASE("unknown model kinds are rejected by the transform") {
  SpectralTriple t = build_circle_dirac();
  t.kind = "noncommutative-torus";
  REQUIRE_THROWS_MATCHES(
      fredholm_module(t), std::invalid_argument,
      Message("no bounded transform for model kind: noncommutative-torus"));
}

TEST_CASE("conditioned trace") {
  SpectralTriple t = build_circle_dirac();
  FredholmModule m = fredholm_module(t);

  SECTION("vanishes on the zero operator") {
    Operator z{BandOperator::zero()};
    REQUIRE(fredholm_trace(m, z, 64, false).value == cplx{0.0});
    REQUIRE(fredholm_trace(m, z, 64, true).value == cplx{0.0});
  }

  SECTION("reduces to the ordinary trace when F is an involution") {
    FredholmModule inv;
    inv.F = Operator{BandOperator::identity()};
    inv.defect = Operator{BandOperator::zero()};
    inv.parity = Parity::odd;
    inv.p = 1.0;
    Operator T{circle_heat(1.0)};
    auto [tv, tt] = certified_trace(as_band(T), 64);
    CertifiedValue got = fredholm_trace(inv, T, 64, false);
    REQUIRE(std::abs(got.value - tv) < 1e-13 + tt);
  }

  SECTION("winding symbol commutators converge under window doubling") {
    Operator T =
        compose(t.generator("U*"), op_commutator(m.F, t.generator("U")));
    CertifiedValue prev;
    for (std::int64_t w : {64, 128, 256}) {
      CertifiedValue v = fredholm_trace(m, T, w, true);
      if (w > 64) {
        REQUIRE(std::abs(v.value - prev.value) <=
                v.tail_bound + prev.tail_bound);
        REQUIRE(v.tail_bound < prev.tail_bound);
      }
      prev = v;
    }
    REQUIRE(prev.value.real() == Approx(2.0).margin(2e-5));
  }
}

TEST_CASE("odd character cochain") {
  SpectralTriple t = build_circle_dirac();
  FredholmModule m = fredholm_module(t);

  SECTION("degree parity is enforced") {
    REQUIRE_THROWS_MATCHES(character_tau(m, 2, 64), std::invalid_argument,
                           Message("character degree parity mismatch"));
  }

  SECTION("degree one evaluates the conditioned commutator trace") {
    CyclicCochain tau = character_tau(m, 1, 128);
    cplx lhs =
        tau.components.at(1)({t.generator("U*"), t.generator("U")}).value;
    Operator w =
        compose(t.generator("U*"), op_commutator(m.F, t.generator("U")));
    cplx pref = sqrt_two_i() * std::tgamma(1.5);
    cplx rhs = pref * fredholm_trace(m, w, 128, true).value;
    REQUIRE(std::abs(lhs - rhs) < 1e-14);
  }

  SECTION("an identity in a commutator slot annihilates the cochain") {
    CyclicCochain tau = character_tau(m, 1, 64);
    Operator one{BandOperator::identity()};
    cplx v = tau.components.at(1)({t.generator("U"), one}).value;
    REQUIRE(v == cplx{0.0});
  }

  SECTION("pairing with the unitary Chern character is minus the calibration") {
    CyclicCochain tau = character_tau(m, 1, 256);
    auto resolve = [&](const std::string& s) { return t.generator(s); };
    CertifiedValue p = pair(tau, chern_invertible(1), resolve);
    REQUIRE(p.value.real() == Approx(-kappa()).margin(1e-3));
    REQUIRE(std::abs(p.value.imag()) < 1e-8);
  }
}

TEST_CASE("defect-corrected character") {
  SECTION("collapses to the plain character on an involution") {
    std::mt19937 rng(23);
    FredholmModule m = scalar_defect_module(1.0, 4);
    CyclicCochain chn = character_chn(m, 3, 0);
    CyclicCochain tau = character_tau(m, 3, 0);
    std::vector<Operator> word;
    for (int i = 0; i < 4; ++i) word.push_back(Operator{random_dense(rng, 4)});
    cplx a = chn.components.at(3)(word).value;
    cplx b = tau.components.at(3)(word).value;
    REQUIRE(std::abs(a - b) < 1e-12 * (1.0 + std::abs(b)));
    // lower components carry at least one defect factor and vanish
    std::vector<Operator> pairword{word[0], word[1]};
    REQUIRE(chn.components.at(1)(pairword).value == cplx{0.0});
  }

  SECTION("degree-five correction at arity two sums three insertions") {
    std::mt19937 rng(41);
    double alpha = 0.8;
    FredholmModule m = scalar_defect_module(alpha, 4);
    DenseOperator a0 = random_dense(rng, 4), a1 = random_dense(rng, 4);
    CyclicCochain chn = character_chn(m, 5, 0);
    cplx got = chn.components.at(1)({Operator{a0}, Operator{a1}}).value;
    Eigen::MatrixXcd c = as_dense(m.F).m * a1.m - a1.m * as_dense(m.F).m;
    cplx pref = sqrt_two_i() * (std::tgamma(3.5) / factorial(3));
    cplx want = 3.0 * std::pow(1.0 - alpha * alpha, 2.0) * pref *
                cplx((a0.m * c).trace());
    REQUIRE(std::abs(got - want) < 1e-12 * std::abs(want));
  }

  SECTION("degree parity is enforced") {
    FredholmModule m = scalar_defect_module(0.5, 2);
    REQUIRE_THROWS_MATCHES(character_chn(m, 2, 0), std::invalid_argument,
                           Message("character degree parity mismatch"));
  }
}

TEST_CASE("winding numbers of circle symbols") {
  REQUIRE(winding_number(WindingSymbol::monomial(1)) == 1);
  REQUIRE(winding_number(WindingSymbol::monomial(-2)) == -2);
  WindingSymbol c;
  c.coefficients = {{0, cplx{2.5, -0.3}}};
  REQUIRE(winding_number(c) == 0);

  WindingSymbol mixed;
  mixed.coefficients = {{1, cplx{1.0}}, {0, cplx{0.2}}};
  REQUIRE(winding_number(mixed) == 1);

  WindingSymbol bad;
  bad.coefficients = {{1, cplx{1.0}}, {0, cplx{-1.0}}};
  REQUIRE_THROWS_MATCHES(winding_number(bad), std::domain_error,
                         Message("symbol vanishes on the circle"));
}

TEST_CASE("direct index of truncated symbol compressions") {
  REQUIRE(index_direct_odd(WindingSymbol::monomial(1), 256) == -1);
  REQUIRE(index_direct_odd(WindingSymbol::monomial(-3), 256) == 3);
  REQUIRE(index_direct_odd(WindingSymbol::monomial(0), 64) == 0);

  SECTION("slow kernel decay is flagged instead of miscounted") {
    WindingSymbol s;
    s.coefficients = {{1, cplx{1.0}}, {0, cplx{0.9}}};
    REQUIRE_THROWS_MATCHES(index_direct_odd(s, 32), std::domain_error,
                           Message("window too small"));
    REQUIRE(index_direct_odd(s, 256) == -1);
  }

  SECTION("windows below the edge band are rejected outright") {
    REQUIRE_THROWS_MATCHES(index_direct_odd(WindingSymbol::monomial(1), 2),
                           std::domain_error, Message("window too small"));
  }
}

TEST_CASE("odd index pairing routes agree") {
  SpectralTriple t = build_circle_dirac();

  SECTION("the shift has index minus one on both routes") {
    WindingSymbol u = WindingSymbol::monomial(1);
    CertifiedValue d = index_pairing_odd(t, u, PairingRoute::direct);
    CertifiedValue c = index_pairing_odd(t, u, PairingRoute::character);
    REQUIRE(d.value.real() == -1.0);
    REQUIRE(c.value.real() == Approx(-1.0).margin(1e-3));
  }

  SECTION("constants pair to zero") {
    CertifiedValue c =
        index_pairing_odd(t, WindingSymbol::monomial(0), PairingRoute::character);
    REQUIRE(std::abs(c.value) < 1e-10);
  }

  SECTION("the squared shift has index minus two on both routes") {
    WindingSymbol u = WindingSymbol::monomial(2);
    CertifiedValue d = index_pairing_odd(t, u, PairingRoute::direct, 3, 256);
    CertifiedValue c = index_pairing_odd(t, u, PairingRoute::character, 3, 256);
    REQUIRE(d.value.real() == -2.0);
    REQUIRE(std::abs(c.value - d.value) <= d.tail_bound + c.tail_bound + 1e-6);
    REQUIRE(c.value.real() == Approx(-2.0).margin(1e-3));
  }

  SECTION("degrees one and three agree within their certificates") {
    WindingSymbol u = WindingSymbol::monomial(1);
    CertifiedValue v1 = index_pairing_odd(t, u, PairingRoute::character, 1, 256);
    CertifiedValue v3 = index_pairing_odd(t, u, PairingRoute::character, 3, 256);
    REQUIRE(std::abs(v1.value - v3.value) <= v1.tail_bound + v3.tail_bound);
    REQUIRE(std::abs(v1.value - v3.value) < 1e-4);
  }

  SECTION("even triples are rejected") {
    Eigen::MatrixXcd pm(1, 1);
    pm << 1.0;
    SpectralTriple even = build_finite_even(1, 1, DenseOperator{pm}, {});
    REQUIRE_THROWS_AS(index_pairing_odd(even, WindingSymbol::monomial(1),
                                        PairingRoute::direct),
                      std::invalid_argument);
  }
}

TEST_CASE("even index pairing routes agree") {
  Eigen::MatrixXcd pm(1, 2);
  pm << 1.0, 0.0;
  SpectralTriple t = build_finite_even(2, 1, DenseOperator{pm}, {});

  SECTION("the unit idempotent recovers the index of P") {
    CertifiedValue d =
        index_pairing_even(t, DenseOperator::identity(3), PairingRoute::direct);
    CertifiedValue c = index_pairing_even(t, DenseOperator::identity(3),
                                          PairingRoute::character);
    REQUIRE(d.value.real() == 1.0);
    REQUIRE(c.value.real() == Approx(1.0).margin(1e-8));
  }

  SECTION("the zero idempotent pairs to zero") {
    DenseOperator z{Eigen::MatrixXcd::Zero(3, 3)};
    REQUIRE(index_pairing_even(t, z, PairingRoute::direct).value == cplx{0.0});
    REQUIRE(std::abs(index_pairing_even(t, z, PairingRoute::character).value) <
            1e-14);
  }

  SECTION("a diagonal projector commuting with D localizes the index") {
    Eigen::MatrixXcd em = Eigen::MatrixXcd::Zero(3, 3);
    em(1, 1) = 1.0;  // the mode P never reaches
    DenseOperator e{em};
    CertifiedValue d = index_pairing_even(t, e, PairingRoute::direct);
    CertifiedValue c = index_pairing_even(t, e, PairingRoute::character);
    REQUIRE(d.value.real() == 1.0);
    REQUIRE(std::abs(c.value - d.value) < 1e-8);
  }

  SECTION("odd triples are rejected") {
    SpectralTriple circ = build_circle_dirac();
    REQUIRE_THROWS_AS(index_pairing_even(circ, DenseOperator::identity(3),
                                         PairingRoute::direct),
                      std::invalid_argument);
  }
}

TEST_CASE("pairing calibration is pinned") {
  REQUIRE(kappa() == -1.0);
  REQUIRE(kappa(64) == -1.0);
}

TEST_CASE("graded heat trace computes the index at every scale") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    int dp = 2 + int(rng() % 3), dm = 1 + int(rng() % 3);
    Eigen::MatrixXcd pm(dm, dp);
    std::normal_distribution<double> g;
    for (int i = 0; i < dm; ++i)
      for (int j = 0; j < dp; ++j) pm(i, j) = cplx(g(rng), g(rng));
    SpectralTriple t = build_finite_even(dp, dm, DenseOperator{pm}, {});
    CertifiedValue ind = index_pairing_even(
        t, DenseOperator::identity(dp + dm), PairingRoute::direct);
    for (double T : {0.1, 1.0, 10.0}) {
      CertifiedValue h = graded_heat_trace(t, T);
      REQUIRE(std::abs(h.value - ind.value) < 1e-10);
    }
  }

  SECTION("needs an even triple") {
    REQUIRE_THROWS_AS(graded_heat_trace(build_circle_dirac(), 1.0),
                      std::invalid_argument);
  }
}
