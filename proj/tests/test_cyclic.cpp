#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <complex>
#include <random>
#include <string>
#include <vector>

#include "ncg/cyclic.hpp"
#include "ncg/dense_operator.hpp"
#include "ncg/rational.hpp"
#include "oracles.hpp"

using ncg::CyclicChain;
using ncg::Rational;
using cplx = std::complex<double>;

namespace {

std::string power_label(int k) {
  if (k == 0) return ncg::kUnitLabel;
  return "u^" + std::to_string(k);
}

int label_power(const std::string& s) {
  if (s == ncg::kUnitLabel) return 0;
  return std::stoi(s.substr(2));
}

// Monomial alphabet u^k with |k| <= cutoff; products beyond it leave the set.
template <class Coeff>
ncg::MultOracle<Coeff> monomial_oracle(int cutoff) {
  return [cutoff](const std::string& a, const std::string& b)
             -> std::optional<ncg::LabelCombo<Coeff>> {
    int k = label_power(a) + label_power(b);
    if (std::abs(k) > cutoff) return std::nullopt;
    return ncg::LabelCombo<Coeff>{{Coeff{1}, power_label(k)}};
  };
}

// Two noncommuting letters with their formal products named explicitly.
template <class Coeff>
ncg::MultOracle<Coeff> free_pair_oracle() {
  return [](const std::string& a, const std::string& b)
             -> std::optional<ncg::LabelCombo<Coeff>> {
    if (a == ncg::kUnitLabel) return ncg::LabelCombo<Coeff>{{Coeff{1}, b}};
    if (b == ncg::kUnitLabel) return ncg::LabelCombo<Coeff>{{Coeff{1}, a}};
    if ((a == "x" || a == "y") && (b == "x" || b == "y"))
      return ncg::LabelCombo<Coeff>{{Coeff{1}, a + b}};
    return std::nullopt;
  };
}

// {1, e} with e idempotent.
template <class Coeff>
ncg::MultOracle<Coeff> idempotent_oracle() {
  return [](const std::string& a, const std::string& b)
             -> std::optional<ncg::LabelCombo<Coeff>> {
    if (a == ncg::kUnitLabel) return ncg::LabelCombo<Coeff>{{Coeff{1}, b}};
    if (b == ncg::kUnitLabel) return ncg::LabelCombo<Coeff>{{Coeff{1}, a}};
    if (a == "e" && b == "e") return ncg::LabelCombo<Coeff>{{Coeff{1}, "e"}};
    return std::nullopt;
  };
}

template <class Coeff>
const Coeff* find_coeff(const CyclicChain<Coeff>& c, const std::vector<std::string>& w) {
  for (const auto& t : c.terms)
    if (t.word == w) return &t.coeff;
  return nullptr;
}

CyclicChain<Rational> random_rational_chain(std::mt19937& rng) {
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_int_distribution<int> pw(-2, 2);
  std::uniform_int_distribution<int> num(-9, 9);
  std::uniform_int_distribution<int> den(1, 9);
  CyclicChain<Rational> c;
  for (int t = 0; t < 3; ++t) {
    CyclicChain<Rational>::Term term;
    int n = num(rng);
    if (n == 0) n = 1;
    term.coeff = Rational{n, den(rng)};
    int l = len(rng);
    for (int j = 0; j < l; ++j) term.word.push_back(power_label(pw(rng)));
    c.terms.push_back(std::move(term));
  }
  return c;
}

}  // namespace

TEST_CASE("b on a pair is the commutator of the labels") {
  CyclicChain<Rational> c;
  c.terms.push_back({Rational{1}, {"x", "y"}});
  CyclicChain<Rational> bc = ncg::boundary_b(c, free_pair_oracle<Rational>());
  REQUIRE(bc.terms.size() == 2);
  const Rational* xy = find_coeff(bc, {"xy"});
  const Rational* yx = find_coeff(bc, {"yx"});
  REQUIRE(xy != nullptr);
  REQUIRE(yx != nullptr);
  REQUIRE(*xy == Rational{1});
  REQUIRE(*yx == Rational{-1});
}

TEST_CASE("b kills zero length words and B inserts the unit") {
  CyclicChain<Rational> c;
  c.terms.push_back({Rational{1}, {"x"}});
  REQUIRE(ncg::boundary_b(c, free_pair_oracle<Rational>()).terms.empty());

  CyclicChain<Rational> bc = ncg::boundary_B(c);
  REQUIRE(bc.terms.size() == 1);
  REQUIRE(bc.terms[0].word == std::vector<std::string>{ncg::kUnitLabel, "x"});
  REQUIRE(bc.terms[0].coeff == Rational{1});

  // A word already led by the unit dies under every cyclic reinsertion.
  CyclicChain<Rational> led;
  led.terms.push_back({Rational{1}, {ncg::kUnitLabel, "x"}});
  REQUIRE(ncg::boundary_B(led).terms.empty());
}

TEST_CASE("differential identities hold exactly on random rational chains") {
  std::mt19937 rng(20260822u);
  auto mult = monomial_oracle<Rational>(8);
  for (int trial = 0; trial < 50; ++trial) {
    CyclicChain<Rational> c = random_rational_chain(rng);

    REQUIRE(ncg::boundary_b(ncg::boundary_b(c, mult), mult).empty_after_normalize());
    REQUIRE(ncg::boundary_B(ncg::boundary_B(c)).empty_after_normalize());

    CyclicChain<Rational> anti = ncg::boundary_b(ncg::boundary_B(c), mult);
    for (const auto& t : ncg::boundary_B(ncg::boundary_b(c, mult)).terms)
      anti.terms.push_back(t);
    REQUIRE(anti.empty_after_normalize());
  }
}

TEST_CASE("products leaving the alphabet raise a closure error") {
  CyclicChain<Rational> c;
  c.terms.push_back({Rational{1}, {"u^5", "u^5"}});
  REQUIRE_THROWS_WITH(ncg::boundary_b(c, monomial_oracle<Rational>(8)),
                      Catch::Matchers::ContainsSubstring("u^5 * u^5"));
}

TEST_CASE("idempotent character has the expected low degree terms") {
  CyclicChain<Rational> ch = ncg::chern_idempotent_rational(2);
  const Rational* deg0 = find_coeff(ch, {"e"});
  const Rational* top = find_coeff(ch, {"e", "e", "e"});
  const Rational* half = find_coeff(ch, {ncg::kUnitLabel, "e", "e"});
  REQUIRE(deg0 != nullptr);
  REQUIRE(top != nullptr);
  REQUIRE(half != nullptr);
  REQUIRE(*deg0 == Rational{1});
  REQUIRE(*top == Rational{-2});
  REQUIRE(*half == Rational{1});

  REQUIRE_THROWS_AS(ncg::chern_idempotent_rational(3), std::invalid_argument);
}

TEST_CASE("invertible character has the expected low degree terms") {
  CyclicChain<cplx> ch = ncg::chern_invertible(3);
  cplx pref = ncg::inv_sqrt_two_pi_i();
  const cplx* deg1 = find_coeff(ch, {"u^-1", "u"});
  const cplx* deg3 = find_coeff(ch, {"u^-1", "u", "u^-1", "u"});
  REQUIRE(deg1 != nullptr);
  REQUIRE(deg3 != nullptr);
  REQUIRE(std::abs(*deg1 - pref) < 1e-15);
  REQUIRE(std::abs(*deg3 + pref) < 1e-15);

  REQUIRE_THROWS_AS(ncg::chern_invertible(2), std::invalid_argument);
  // u = 1 dies under normalization.
  REQUIRE(ncg::chern_invertible(3, ncg::kUnitLabel, ncg::kUnitLabel).terms.empty());
}

TEST_CASE("character entry points validate their matrix arguments") {
  ncg::DenseOperator one = ncg::DenseOperator::identity(1);
  REQUIRE_FALSE(ncg::chern_idempotent(2, one).terms.empty());
  REQUIRE(ncg::chern_idempotent(2, ncg::DenseOperator::zero(2, 2)).terms.empty());

  Eigen::MatrixXcd half(1, 1);
  half << cplx{0.5, 0.0};
  REQUIRE_THROWS_AS(ncg::chern_idempotent(2, ncg::DenseOperator{half}),
                    std::invalid_argument);

  REQUIRE_FALSE(ncg::chern_invertible(1, one).terms.empty());
  Eigen::MatrixXcd sing(2, 2);
  sing << cplx{1.0, 0.0}, cplx{0.0, 0.0}, cplx{0.0, 0.0}, cplx{0.0, 0.0};
  REQUIRE_THROWS_AS(ncg::chern_invertible(1, ncg::DenseOperator{sing}), std::domain_error);
}

TEST_CASE("the truncated idempotent character is closed below the cap") {
  CyclicChain<Rational> ch = ncg::chern_idempotent_rational(6);
  auto mult = idempotent_oracle<Rational>();
  CyclicChain<Rational> total = ncg::boundary_b(ch, mult);
  for (const auto& t : ncg::boundary_B(ch).terms) total.terms.push_back(t);
  total.normalize();
  for (const auto& t : total.terms) {
    INFO("surviving word length " << t.word.size());
    REQUIRE(t.word.size() > 6);  // only spill past the cap may survive
  }
}

TEST_CASE("pairing a cochain with simple chains") {
  ncg::CyclicCochain tr;
  tr.parity = ncg::Parity::even;
  tr.components[0] = [](const std::vector<ncg::Operator>& a) {
    return ncg::CertifiedValue{ncg::as_dense(a[0]).trace(), 0.0};
  };

  Eigen::MatrixXcd e(2, 2);
  e << cplx{0.3, 0.0}, cplx{0.0, 0.0}, cplx{0.0, 0.0}, cplx{0.7, 0.0};
  auto resolve = [&](const std::string& label) -> ncg::Operator {
    if (label == "e") return ncg::Operator{ncg::DenseOperator{e}};
    return ncg::Operator{ncg::DenseOperator::identity(2)};
  };

  CyclicChain<cplx> zero;
  REQUIRE(ncg::pair(tr, zero, resolve).value == cplx{0.0, 0.0});

  CyclicChain<cplx> word;
  word.terms.push_back({cplx{1.0, 0.0}, {"e"}});
  REQUIRE(std::abs(ncg::pair(tr, word, resolve).value - cplx{1.0, 0.0}) < 1e-15);

  ncg::CyclicCochain odd;
  odd.parity = ncg::Parity::odd;
  odd.components[1] = [](const std::vector<ncg::Operator>&) {
    return ncg::CertifiedValue{};
  };
  REQUIRE_THROWS_AS(ncg::pair(odd, word, resolve), std::invalid_argument);
}

TEST_CASE("the pairing is bilinear in the chain") {
  std::mt19937 rng(5u);
  std::normal_distribution<double> g(0.0, 1.0);
  auto rand_mat = [&](int n) {
    Eigen::MatrixXcd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = cplx{g(rng), g(rng)};
    return ncg::DenseOperator{m};
  };
  ncg::DenseOperator A = rand_mat(3), B = rand_mat(3);
  ncg::DenseOperator X = rand_mat(3), Y = rand_mat(3);

  ncg::CyclicCochain phi;
  phi.parity = ncg::Parity::odd;
  phi.components[1] = [A, B](const std::vector<ncg::Operator>& a) {
    return ncg::CertifiedValue{
        (A * ncg::as_dense(a[0]) * B * ncg::as_dense(a[1])).trace(), 0.0};
  };
  auto resolve = [&](const std::string& label) -> ncg::Operator {
    if (label == "x") return ncg::Operator{X};
    if (label == "y") return ncg::Operator{Y};
    return ncg::Operator{ncg::DenseOperator::identity(3)};
  };

  CyclicChain<cplx> c1, c2;
  c1.terms.push_back({cplx{1.0, 0.5}, {"x", "y"}});
  c2.terms.push_back({cplx{-0.25, 1.0}, {"y", "x"}});
  cplx alpha{0.7, -0.4};

  CyclicChain<cplx> combo;
  combo.terms.push_back({alpha * c1.terms[0].coeff, c1.terms[0].word});
  combo.terms.push_back({c2.terms[0].coeff, c2.terms[0].word});

  cplx lhs = ncg::pair(phi, combo, resolve).value;
  cplx rhs = alpha * ncg::pair(phi, c1, resolve).value + ncg::pair(phi, c2, resolve).value;
  REQUIRE(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("the chain and cochain differentials are transposes under pairing") {
  std::mt19937 rng(17u);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd mm(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) mm(r, c) = cplx{g(rng), g(rng)};
  mm += 4.0 * Eigen::MatrixXcd::Identity(3, 3);  // keep it invertible
  ncg::DenseOperator M{mm};
  ncg::DenseOperator Minv{Eigen::MatrixXcd(mm.inverse())};

  Eigen::MatrixXcd gm(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) gm(r, c) = cplx{g(rng), g(rng)};
  ncg::DenseOperator G{gm};
  Eigen::MatrixXcd am(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) am(r, c) = cplx{g(rng), g(rng)};
  ncg::DenseOperator A{am};

  // Vanishes whenever the rightmost slot holds the identity.
  ncg::CyclicCochain phi;
  phi.parity = ncg::Parity::odd;
  phi.components[1] = [A, G](const std::vector<ncg::Operator>& a) {
    ncg::DenseOperator comm = ncg::commutator(G, ncg::as_dense(a[1]));
    return ncg::CertifiedValue{(A * ncg::as_dense(a[0]) * comm).trace(), 0.0};
  };

  auto resolve = [&](const std::string& label) -> ncg::Operator {
    int k = label_power(label);
    ncg::DenseOperator r = ncg::DenseOperator::identity(3);
    for (int j = 0; j < std::abs(k); ++j) r = (k > 0) ? r * M : r * Minv;
    return ncg::Operator{r};
  };
  auto mult = monomial_oracle<cplx>(8);

  CyclicChain<cplx> c;
  c.terms.push_back({cplx{0.8, 0.1}, {"u^2", "u^-1", "u^1"}});
  c.terms.push_back({cplx{-0.3, 0.6}, {"u^1", "u^1", "u^-2"}});

  cplx lhs = ncg::pair(phi, ncg::boundary_b(c, mult), resolve).value;
  cplx rhs = ncg::pair(ncg::cochain_b(phi), c, resolve).value;
  REQUIRE(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("chains serialize to a json compatible text form") {
  CyclicChain<cplx> c;
  c.terms.push_back({cplx{1.0, 0.0}, {"e"}});
  c.terms.push_back({cplx{-0.5, 2.0}, {ncg::kUnitLabel, "e", "e"}});
  std::string text = ncg::chain_to_text(c);

  auto parsed = nlohmann::json::parse(text);
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 2);
  REQUIRE(parsed[0]["coeff"][0].get<double>() == 1.0);
  REQUIRE(parsed[0]["word"][0].get<std::string>() == "e");
  REQUIRE(parsed[1]["coeff"][1].get<double>() == 2.0);
  REQUIRE(parsed[1]["word"].size() == 3);
}
