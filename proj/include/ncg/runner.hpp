#pragma once

// Task execution.  One model is built per job; tasks run independently (a
// thread pool sized by NCG_THREADS, serial arithmetic within each task, so
// results are bit-stable) and failures become rows instead of aborting the
// batch.

#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "ncg/config.hpp"
#include "ncg/finite_part.hpp"
#include "ncg/fredholm.hpp"
#include "ncg/heat.hpp"
#include "ncg/local_formula.hpp"
#include "ncg/models.hpp"
#include "ncg/report.hpp"

namespace ncg {

struct RunResult {
  std::vector<ReportRow> rows;
  int exit_code{0};
};

namespace detail {

inline SpectralTriple build_model(const ModelConfig& mc) {
  if (mc.kind == "circle") return build_circle_dirac();
  Eigen::Index dm = mc.p_matrix.rows(), dp = mc.p_matrix.cols();
  std::map<std::string, DenseOperator> gens;
  for (const auto& [label, m] : mc.generators) gens[label] = DenseOperator{m};
  return build_finite_even(dp, dm, DenseOperator{mc.p_matrix}, gens);
}

// The odd pairing chain wants the symbol and its inverse as generators.
inline SpectralTriple with_symbol(const SpectralTriple& t, const WindingSymbol& s) {
  if (!s.is_unitary()) throw std::domain_error("symbol is not unitary");
  SpectralTriple r = t;
  r.generators["u"] = multiplication_operator(s);
  r.generators["u^-1"] = multiplication_operator(s.unitary_inverse());
  return r;
}

inline void round_row(ReportRow& row, double tolerance) {
  double re = row.value.real();
  long n = std::lround(re);
  double defect = std::abs(row.value - cplx{double(n)});
  row.rounded = n;
  row.defect = defect;
  if (defect > tolerance) row.failed = true;
}

// Extract the rectangular block of D mapping the + graded part to the - part.
inline Eigen::MatrixXcd minus_plus_block(const SpectralTriple& t) {
  const Eigen::MatrixXcd& D = as_dense(t.D).m;
  const Eigen::MatrixXcd& G = as_dense(*t.grading).m;
  std::vector<Eigen::Index> plus, minus;
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    (G(i, i).real() > 0.0 ? plus : minus).push_back(i);
  Eigen::MatrixXcd P(Eigen::Index(minus.size()), Eigen::Index(plus.size()));
  for (size_t r = 0; r < minus.size(); ++r)
    for (size_t c = 0; c < plus.size(); ++c)
      P(Eigen::Index(r), Eigen::Index(c)) = D(minus[r], plus[c]);
  return P;
}

inline std::string detail_num_row(double eps, int k, const CertifiedValue& v) {
  return num(eps) + "," + std::to_string(k) + "," + num(v.value.real()) + "," +
         num(v.value.imag()) + "," + num(v.tail_bound) + "\n";
}

// Densify an epsilon list with geometric midpoints until a singular-basis fit
// is determined; keeps the given endpoints.
inline std::vector<double> densify_eps(std::vector<double> eps, size_t need) {
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  while (eps.size() < need) {
    std::vector<double> next;
    for (size_t i = 0; i + 1 < eps.size(); ++i) {
      next.push_back(eps[i]);
      next.push_back(std::sqrt(eps[i] * eps[i + 1]));
    }
    next.push_back(eps.back());
    if (next.size() == eps.size()) {  // single point: spread it
      next.push_back(eps.back() * 0.5);
    }
    eps = std::move(next);
  }
  return eps;
}

inline ReportRow run_task(const SpectralTriple& model, const TaskConfig& t,
                          std::int64_t window, bool verbose, std::string& log) {
  ReportRow row;
  row.method = t.method_name;
  row.k = 0;
  bool odd = model.parity == Parity::odd;

  switch (t.method) {
    case Method::winding: {
      int w = winding_number(*t.symbol);
      row.value = cplx{double(w)};
      row.tail_bound = 0.0;
      round_row(row, t.tolerance);
      break;
    }

    case Method::direct: {
      int ind;
      if (odd) {
        ind = index_direct_odd(*t.symbol, window);
      } else {
        ind = index_direct_even(model, as_dense(model.generator(t.projection)));
      }
      row.value = cplx{double(ind)};
      row.tail_bound = 0.0;
      round_row(row, t.tolerance);
      break;
    }

    case Method::character: {
      row.k = t.n;
      FredholmModule fm = fredholm_module(model);
      CyclicCochain ch = character_chn(fm, t.n, window);
      CertifiedValue v;
      if (odd) {
        SpectralTriple m2 = with_symbol(model, *t.symbol);
        auto resolve = [&m2](const std::string& l) { return m2.generator(l); };
        v = pair(ch, chern_invertible(t.n), resolve);
        double kap = kappa();
        v.value /= kap;
      } else {
        auto resolve = [&model, &t](const std::string& l) {
          return l == "e" ? model.generator(t.projection) : model.generator(l);
        };
        v = pair(ch, chern_idempotent(t.n), resolve);
      }
      row.value = v.value;
      row.tail_bound = v.tail_bound;
      round_row(row, t.tolerance);
      break;
    }

    case Method::heat: {
      row.k = t.heat_degree;
      double kap = odd ? kappa() : 1.0;
      SpectralTriple paired = odd ? with_symbol(model, *t.symbol) : model;
      auto resolve = [&paired, &t, odd](const std::string& l) {
        if (!odd && l == "e") return paired.generator(t.projection);
        return paired.generator(l);
      };
      CyclicChain<cplx> chern = odd ? chern_invertible(t.heat_degree)
                                    : chern_idempotent(t.heat_degree);
      SingularBasis basis = SingularBasis::circle_index();
      std::vector<double> eps = densify_eps(t.eps, basis.terms.size() + 2);
      std::vector<std::pair<double, cplx>> samples;
      if (verbose) log += "eps,k,re,im,tail_bound\n";
      for (double e : eps) {
        CertifiedValue p;
        for (int k = odd ? 1 : 0; k <= t.heat_degree; k += 2) {
          CyclicCochain ch = heat_cochain(model, k, e, window);
          CertifiedValue term = pair(ch, chern, resolve);
          p += term;
          if (verbose)
            log += detail_num_row(e, k, term);
        }
        samples.emplace_back(e, p.value / kap);
      }
      FinitePartResult fp = finite_part(samples, basis);
      row.value = fp.finite;
      row.tail_bound = fp.residual;
      round_row(row, t.tolerance);
      break;
    }

    case Method::residue: {
      row.k = t.k;
      ResidueStyle style =
          t.variant == "raw" ? ResidueStyle::raw : ResidueStyle::renormalized;
      double kap = odd ? kappa() : 1.0;
      CyclicCochain psi = local_cocycle(model, t.k, style, kap, t.m_cap);
      CertifiedValue v;
      if (odd) {
        SpectralTriple m2 = with_symbol(model, *t.symbol);
        auto resolve = [&m2](const std::string& l) { return m2.generator(l); };
        v = pair(psi, chern_invertible(t.k), resolve);
      } else {
        auto resolve = [&model, &t](const std::string& l) {
          return l == "e" ? model.generator(t.projection) : model.generator(l);
        };
        v = pair(psi, chern_idempotent(t.k), resolve);
      }
      row.value = v.value;
      row.tail_bound = v.tail_bound;
      round_row(row, t.tolerance);
      break;
    }

    case Method::validate: {
      auto diags = validate_triple(model);
      double worst = 0.0;
      bool ok = true;
      for (const auto& d : diags) {
        worst = std::max(worst, d.defect);
        if (!d.pass) {
          ok = false;
          log += "validate: " + d.check + " failed, defect " +
                 std::to_string(d.defect) + "\n";
        }
      }
      row.value = cplx{worst};
      row.tail_bound = 0.0;
      row.failed = !ok;
      break;
    }

    case Method::supertrace: {
      CertifiedValue first;
      double spread = 0.0;
      for (size_t i = 0; i < t.times.size(); ++i) {
        CertifiedValue v = graded_heat_trace(model, t.times[i]);
        if (i == 0)
          first = v;
        else
          spread = std::max(spread, std::abs(v.value - first.value));
      }
      row.value = first.value;
      row.tail_bound = first.tail_bound + spread;
      round_row(row, t.tolerance);
      break;
    }

    case Method::zeta: {
      Eigen::MatrixXcd P = minus_plus_block(model);
      Eigen::MatrixXcd A =
          Eigen::MatrixXcd::Identity(P.cols(), P.cols()) + P.adjoint() * P;
      Eigen::MatrixXcd B =
          Eigen::MatrixXcd::Identity(P.rows(), P.rows()) + P * P.adjoint();
      auto zdiff = [&](double s) {
        DenseOperator a{A}, b{B};
        auto pw = [s](double x) { return std::pow(x, -s); };
        return operator_function(a, pw).trace() - operator_function(b, pw).trace();
      };
      cplx z0 = zdiff(0.0);
      double spread = 0.0;
      for (double s : {1.0, 2.5}) spread = std::max(spread, std::abs(zdiff(s) - z0));
      row.value = z0;
      row.tail_bound = spread;
      round_row(row, t.tolerance);
      break;
    }
  }
  return row;
}

inline size_t thread_budget(size_t tasks) {
  size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("NCG_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = size_t(v);
  }
  return std::max<size_t>(1, std::min(n, tasks));
}

}  // namespace detail

inline RunResult run(const JobConfig& job,
                     std::optional<std::int64_t> window_override = std::nullopt,
                     bool verbose = false, std::string* verbose_log = nullptr) {
  SpectralTriple model = detail::build_model(job.model);

  RunResult res;
  res.rows.resize(job.tasks.size());
  std::vector<std::string> logs(job.tasks.size());

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= job.tasks.size()) return;
      const TaskConfig& t = job.tasks[i];
      std::int64_t window = window_override.value_or(t.window);
      auto start = std::chrono::steady_clock::now();
      ReportRow row;
      try {
        row = detail::run_task(model, t, window, verbose, logs[i]);
      } catch (const std::exception& e) {
        row.method = t.method_name;
        row.failed = true;
        row.error = e.what();
      }
      row.task = int(i);
      row.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      res.rows[i] = std::move(row);
    }
  };

  size_t nt = detail::thread_budget(job.tasks.size());
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& row : res.rows)
    if (row.failed) res.exit_code = 1;
  if (verbose_log)
    for (auto& l : logs) *verbose_log += l;
  return res;
}

}  // namespace ncg
