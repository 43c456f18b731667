#include "gbdl/dictlearn.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "gbdl/metrics.hpp"

namespace gbdl {

namespace {

constexpr double kProbClip = 1e-12;
constexpr double kEtaDegenerate = 1e-6;

double clip_prob(double p) {
  return std::min(1.0 - kProbClip, std::max(kProbClip, p));
}

}  // namespace

int GroupState::active_atoms() const {
  int active = 0;
  for (int k = 0; k < num_atoms(); ++k) {
    bool used = false;
    for (int i = 0; i < num_patches() && !used; ++i) used = z(k, i) != 0;
    if (used) ++active;
  }
  return active;
}

int GibbsState::num_patches() const {
  int n = 0;
  for (const auto& g : groups) n += g.num_patches();
  return n;
}

int GibbsState::active_atoms() const {
  int a = 0;
  for (const auto& g : groups) a += g.active_atoms();
  return a;
}

double GibbsState::mean_code_gini() const {
  // Mean over patches of the Gini index of that patch's |alpha| vector.
  double acc = 0.0;
  long total = 0;
  for (const auto& g : groups) {
    for (int i = 0; i < g.num_patches(); ++i) acc += gini_index(g.alpha.col(i));
    total += g.num_patches();
  }
  return total > 0 ? acc / static_cast<double>(total) : 0.0;
}

double GibbsState::effective_noise_precision() const {
  double weighted = 0.0;
  long total = 0;
  for (const auto& g : groups) {
    weighted += g.gamma_eps * static_cast<double>(g.num_patches());
    total += g.num_patches();
  }
  return total > 0 ? weighted / static_cast<double>(total) : 1.0;
}

Eigen::MatrixXd gather_columns(const PatchMatrix& patches, const std::vector<int>& ids) {
  Eigen::MatrixXd out(patches.rows(), static_cast<Eigen::Index>(ids.size()));
  for (size_t i = 0; i < ids.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = patches.col(ids[i]);
  return out;
}

GibbsState init_state(const PatchGrouping& grouping, const DependenceMatrix& dep,
                      const std::vector<std::vector<int>>& neighbors, int patch_dim,
                      int num_atoms, const HyperParams& hyper, uint64_t seed) {
  if (num_atoms < 1) throw std::invalid_argument("init_state: need at least one atom");
  GibbsState st;
  st.patch_dim = patch_dim;
  st.num_atoms = num_atoms;
  st.hyper = hyper;
  st.seed = seed;
  const auto members = grouping.members();
  st.groups.resize(members.size());

  for (size_t gi = 0; gi < members.size(); ++gi) {
    GroupState& g = st.groups[gi];
    g.members = members[gi];
    const int N = g.num_patches();
    const int K = num_atoms;
    g.rng = Rng(seed, 0x696e6974ULL, gi);

    std::unordered_map<int, int> local;
    local.reserve(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) local[g.members[static_cast<size_t>(i)]] = i;

    g.dep_rows.resize(static_cast<size_t>(N));
    g.neigh.resize(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
      const int gid = g.members[static_cast<size_t>(i)];
      for (const auto& [j, w] : dep.rows[static_cast<size_t>(gid)])
        g.dep_rows[static_cast<size_t>(i)].emplace_back(local.at(j), w);
      for (int j : neighbors[static_cast<size_t>(gid)])
        g.neigh[static_cast<size_t>(i)].push_back(local.at(j));
    }

    // Atoms: entries iid N(0, 1/patch_dim).
    const double atom_std = 1.0 / std::sqrt(static_cast<double>(patch_dim));
    g.dict.resize(patch_dim, K);
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < patch_dim; ++d) g.dict(d, k) = atom_std * g.rng.normal();

    // eta ~ Beta(c0 eta0, c0 (1 - eta0)); a degenerate direction pins the
    // draw next to the corresponding endpoint.
    g.eta.resize(K);
    const double ea = hyper.c0 * hyper.eta0;
    const double eb = hyper.c0 * (1.0 - hyper.eta0);
    for (int k = 0; k < K; ++k) {
      if (eb <= 0.0)
        g.eta(k) = 1.0 - kEtaDegenerate;
      else if (ea <= 0.0)
        g.eta(k) = kEtaDegenerate;
      else
        g.eta(k) = g.rng.beta(ea, eb);
    }

    g.gamma_eps = g.rng.gamma(hyper.g0, hyper.h0);
    g.gamma_s.resize(K);
    for (int k = 0; k < K; ++k) g.gamma_s(k) = g.rng.gamma(hyper.e0, hyper.f0);

    g.pi_star.resize(K, N);
    for (int l = 0; l < N; ++l)
      for (int k = 0; k < K; ++k)
        g.pi_star(k, l) =
            clip_prob(g.rng.beta(hyper.c1 * g.eta(k), hyper.c1 * (1.0 - g.eta(k))));

    g.pi = Eigen::MatrixXd::Zero(K, N);
    for (int i = 0; i < N; ++i)
      for (const auto& [l, w] : g.dep_rows[static_cast<size_t>(i)])
        g.pi.col(i) += w * g.pi_star.col(l);

    g.z.resize(K, N);
    g.s.resize(K, N);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < K; ++k) g.z(k, i) = g.rng.bernoulli(g.pi(k, i)) ? 1 : 0;
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < K; ++k)
        g.s(k, i) = g.rng.normal(0.0, 1.0 / std::sqrt(g.gamma_s(k)));
    g.alpha = g.s.cwiseProduct(g.z.cast<double>());

    g.unused_sweeps = Eigen::VectorXi::Zero(K);
  }
  return st;
}

void set_dependence(GibbsState& state, const DependenceMatrix& dep) {
  for (auto& g : state.groups) {
    std::unordered_map<int, int> local;
    local.reserve(g.members.size());
    for (size_t i = 0; i < g.members.size(); ++i) local[g.members[i]] = static_cast<int>(i);
    for (size_t i = 0; i < g.members.size(); ++i) {
      auto& row = g.dep_rows[i];
      row.clear();
      for (const auto& [j, w] : dep.rows[static_cast<size_t>(g.members[i])])
        row.emplace_back(local.at(j), w);
    }
    // Mixed activation probabilities follow the new rows.
    const int N = g.num_patches();
    g.pi.setZero();
    for (int i = 0; i < N; ++i)
      for (const auto& [l, w] : g.dep_rows[static_cast<size_t>(i)])
        g.pi.col(i) += w * g.pi_star.col(l);
  }
}

void reseed_streams(GibbsState& state, uint64_t seed, uint64_t frame) {
  for (size_t gi = 0; gi < state.groups.size(); ++gi)
    state.groups[gi].rng = Rng(seed, frame, gi, 0x7377656570ULL);
}

void sample_codes(GroupState& g, const Eigen::MatrixXd& X) {
  const int K = g.num_atoms();
  const int N = g.num_patches();
  if (!X.allFinite()) throw std::invalid_argument("sample_codes: non-finite patches");
  Eigen::VectorXd dd(K);
  for (int k = 0; k < K; ++k) dd(k) = g.dict.col(k).squaredNorm();

  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd r = X.col(i) - g.dict * g.alpha.col(i);
    for (int k = 0; k < K; ++k) {
      const double a_old = g.alpha(k, i);
      // d_k . r_{i,-k} without forming the leave-one-out residual
      const double dr = g.dict.col(k).dot(r) + a_old * dd(k);
      const double pik = g.pi(k, i);
      int znew;
      if (pik <= 0.0) {
        znew = 0;
      } else if (pik >= 1.0) {
        znew = 1;
      } else {
        // log p1/p0 with the weight marginalized over its prior
        const double q = g.gamma_s(k) / g.gamma_eps + dd(k);
        const double expterm = 0.5 * g.gamma_eps * dr * dr / q;
        const double logit = std::log(pik) - std::log1p(-pik) -
                             0.5 * std::log1p(g.gamma_eps * dd(k) / g.gamma_s(k)) +
                             expterm;
        const double p1 = 1.0 / (1.0 + std::exp(-logit));
        znew = g.rng.bernoulli(p1) ? 1 : 0;
      }
      double snew;
      if (znew) {
        const double prec = g.gamma_s(k) + g.gamma_eps * dd(k);
        snew = g.rng.normal(g.gamma_eps * dr / prec, 1.0 / std::sqrt(prec));
      } else {
        snew = g.rng.normal(0.0, 1.0 / std::sqrt(g.gamma_s(k)));
      }
      g.z(k, i) = static_cast<uint8_t>(znew);
      g.s(k, i) = snew;
      const double a_new = znew ? snew : 0.0;
      if (a_new != a_old) {
        r += (a_old - a_new) * g.dict.col(k);
        g.alpha(k, i) = a_new;
      }
    }
  }
}

void sample_dictionary(GroupState& g, const Eigen::MatrixXd& X, bool add_noise) {
  if (!X.allFinite()) throw std::invalid_argument("sample_dictionary: non-finite patches");
  const int K = g.num_atoms();
  const int D = g.dim();
  const double prior_prec = static_cast<double>(D);  // atoms ~ N(0, I/D)

  Eigen::MatrixXd lambda = g.gamma_eps * (g.alpha * g.alpha.transpose());
  lambda.diagonal().array() += prior_prec;
  Eigen::LLT<Eigen::MatrixXd> llt(lambda);
  if (llt.info() != Eigen::Success) {
    lambda.diagonal().array() += 1e-10;
    llt.compute(lambda);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("sample_dictionary: factorization failed");
  }

  // Posterior mean: gamma_eps * X alpha^T Lambda^{-1}  (rows independent).
  Eigen::MatrixXd mean_t = llt.solve(g.gamma_eps * (g.alpha * X.transpose()));
  g.dict = mean_t.transpose();

  if (add_noise) {
    Eigen::MatrixXd gauss(K, D);
    for (int d = 0; d < D; ++d)
      for (int k = 0; k < K; ++k) gauss(k, d) = g.rng.normal();
    // Columns of U^{-1} gauss are N(0, Lambda^{-1}).
    g.dict += llt.matrixU().solve(gauss).transpose();
  }
}

void sample_noise_precision(GroupState& g, const Eigen::MatrixXd& X, const HyperParams& h) {
  const double rss = (X - g.dict * g.alpha).squaredNorm();
  const double shape = h.g0 + 0.5 * static_cast<double>(g.dim()) * g.num_patches();
  g.gamma_eps = g.rng.gamma(shape, h.h0 + 0.5 * rss);
}

void sample_weight_precisions(GroupState& g, const HyperParams& h) {
  const int K = g.num_atoms();
  const int N = g.num_patches();
  for (int k = 0; k < K; ++k) {
    double cnt = 0.0, ss = 0.0;
    for (int i = 0; i < N; ++i) {
      if (g.z(k, i)) {
        cnt += 1.0;
        ss += g.s(k, i) * g.s(k, i);
      }
    }
    g.gamma_s(k) = g.rng.gamma(h.e0 + 0.5 * cnt, h.f0 + 0.5 * ss);
  }
}

void sample_pi_star(GroupState& g, const HyperParams& h) {
  const int K = g.num_atoms();
  const int N = g.num_patches();
  Eigen::VectorXd ones(K);
  for (int l = 0; l < N; ++l) {
    ones.setZero();
    const auto& q = g.neigh[static_cast<size_t>(l)];
    for (int i : q) ones += g.z.col(i).cast<double>();
    const double qsize = static_cast<double>(q.size());
    for (int k = 0; k < K; ++k) {
      const double a = h.c1 * g.eta(k) + ones(k);
      const double b = h.c1 * (1.0 - g.eta(k)) + (qsize - ones(k));
      g.pi_star(k, l) = clip_prob(g.rng.beta(a, b));
    }
  }
  g.pi.setZero();
  for (int i = 0; i < N; ++i)
    for (const auto& [l, w] : g.dep_rows[static_cast<size_t>(i)])
      g.pi.col(i) += w * g.pi_star.col(l);
}

namespace {

// Truncated exponential with density proportional to exp(-rate * x) on
// [lo, hi]; rate may take either sign, |rate| ~ 0 degenerates to uniform.
double truncated_exp(Rng& rng, double rate, double lo, double hi) {
  const double width = hi - lo;
  if (!(width > 0.0)) return lo;
  if (std::abs(rate) * width < 1e-12) return lo + rng.uniform() * width;
  const bool mirrored = rate < 0.0;
  const double lam = std::abs(rate);
  const double u = rng.uniform_pos();
  const double x = -std::log1p(u * std::expm1(-lam * width)) / lam;  // in [0, width]
  return mirrored ? hi - x : lo + x;
}

}  // namespace

void sample_eta(GroupState& g, const HyperParams& h) {
  const int K = g.num_atoms();
  const int N = g.num_patches();
  const double pa = h.c0 * h.eta0 - 1.0;          // prior exponent on eta
  const double pb = h.c0 * (1.0 - h.eta0) - 1.0;  // prior exponent on 1-eta
  const bool use_a = h.c0 * h.eta0 > 0.0 && pa != 0.0;
  const bool use_b = h.c0 * (1.0 - h.eta0) > 0.0 && pb != 0.0;

  for (int k = 0; k < K; ++k) {
    const double cur = g.eta(k);
    double rate = 0.0;
    for (int l = 0; l < N; ++l) {
      const double p = g.pi_star(k, l);
      rate -= h.c1 * (std::log(p) - std::log1p(-p));
    }

    double lo = kProbClip, hi = 1.0 - kProbClip;
    if (use_a) {
      const double log_u = std::log(g.rng.uniform_pos()) + pa * std::log(cur);
      const double bound = std::exp(log_u / pa);
      if (pa > 0.0)
        lo = std::max(lo, bound);
      else
        hi = std::min(hi, bound);
    }
    if (use_b) {
      const double log_v = std::log(g.rng.uniform_pos()) + pb * std::log1p(-cur);
      const double bound = 1.0 - std::exp(log_v / pb);
      if (pb > 0.0)
        hi = std::min(hi, bound);
      else
        lo = std::max(lo, bound);
    }
    {
      // w ~ Unif(0, sin^N(pi eta)); constraint kept in the log domain
      const double log_w =
          std::log(g.rng.uniform_pos()) + N * std::log(std::sin(M_PI * cur));
      const double m = std::exp(log_w / N);  // sin(pi eta') >= m
      const double edge = std::asin(std::min(1.0, m)) / M_PI;
      lo = std::max(lo, edge);
      hi = std::min(hi, 1.0 - edge);
    }

    if (!(lo <= hi)) {
      ++g.eta_fallbacks;  // numerically empty slice: keep the current value
      continue;
    }
    g.eta(k) = truncated_exp(g.rng, rate, lo, hi);
  }
}

namespace {

void redraw_idle_atoms(GroupState& g, int after) {
  const int K = g.num_atoms();
  const int N = g.num_patches();
  const double atom_std = 1.0 / std::sqrt(static_cast<double>(g.dim()));
  for (int k = 0; k < K; ++k) {
    bool used = false;
    for (int i = 0; i < N && !used; ++i) used = g.z(k, i) != 0;
    if (used) {
      g.unused_sweeps(k) = 0;
      continue;
    }
    if (++g.unused_sweeps(k) >= after) {
      for (int d = 0; d < g.dim(); ++d) g.dict(d, k) = atom_std * g.rng.normal();
      g.unused_sweeps(k) = 0;
    }
  }
}

}  // namespace

void gibbs_sweep(GibbsState& state, const PatchMatrix& patches) {
  if (!patches.allFinite())
    throw std::invalid_argument("gibbs_sweep: non-finite patches");
  const int ng = static_cast<int>(state.groups.size());
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 1) reduction(|| : failed)
  for (int gi = 0; gi < ng; ++gi) {
    try {
      GroupState& g = state.groups[static_cast<size_t>(gi)];
      const Eigen::MatrixXd X = gather_columns(patches, g.members);
      sample_codes(g, X);
      sample_dictionary(g, X);
      sample_noise_precision(g, X, state.hyper);
      sample_weight_precisions(g, state.hyper);
      sample_pi_star(g, state.hyper);
      sample_eta(g, state.hyper);
      redraw_idle_atoms(g, state.redraw_unused_after);
    } catch (...) {
      failed = true;  // exceptions must not unwind across the parallel region
    }
  }
  if (failed) throw std::runtime_error("gibbs_sweep: a group update failed");
  ++state.sweep_count;
}

PatchMatrix code_patches(const GibbsState& state, int num_patches) {
  PatchMatrix out = PatchMatrix::Zero(state.patch_dim, num_patches);
  const int ng = static_cast<int>(state.groups.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int gi = 0; gi < ng; ++gi) {
    const GroupState& g = state.groups[static_cast<size_t>(gi)];
    const Eigen::MatrixXd coded = g.dict * g.alpha;
    for (size_t i = 0; i < g.members.size(); ++i)
      out.col(g.members[i]) = coded.col(static_cast<Eigen::Index>(i));
  }
  return out;
}

ComplexImage code_image(const GibbsState& state, int side) {
  return assemble_patches(code_patches(state, side * side), side);
}

}  // namespace gbdl
