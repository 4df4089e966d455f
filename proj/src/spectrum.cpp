#include "obsblock/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "obsblock/error.hpp"

namespace obsblock {

bool SpectralData::all_real() const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (!is_real(i)) return false;
  }
  return true;
}

bool SpectralData::any_defective() const {
  return std::find(defective.begin(), defective.end(), true) != defective.end();
}

namespace {

// One column of the final modal matrix before sorting.
struct Column {
  cplx lambda;
  VecC vector;
  int chain_position = 0;
  bool defective = false;
  int partner = -1;  // index into the column list
};

struct Context {
  const MatR& A;
  const MatC Ac;
  double scale;  // max(1, ||A||)
  SpectrumOptions opt;
  VecC values;
  MatC vectors;
};

// Outcome of resolving one cluster of raw eigenvalue indices.
struct ClusterResult {
  std::vector<Column> columns;
  bool unresolved = false;
};

std::vector<std::vector<int>> single_linkage(const VecC& values, const std::vector<int>& members,
                                             double radius) {
  const int k = static_cast<int>(members.size());
  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (std::abs(values(members[i]) - values(members[j])) <= radius) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(k, -1);
  for (int i = 0; i < k; ++i) {
    const int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(members[i]);
  }
  return groups;
}

Column singleton(const Context& ctx, int idx) {
  Column c;
  c.lambda = ctx.values(idx);
  c.vector = ctx.vectors.col(idx);
  if (c.lambda.imag() == 0.0) c.vector = c.vector.real().cast<cplx>().eval();
  canonicalize(c.vector);
  return c;
}

// Largest spread a k-fold eigenvalue can show after backward-stable
// rounding: a Jordan block of size k moves by about (eps ||A||)^(1/k) ||A||^(1-1/k).
double tight_spread(const Context& ctx, int k) {
  return 10.0 * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / k) * ctx.scale;
}

double diameter(const VecC& values, const std::vector<int>& members) {
  double d = 0.0;
  for (size_t i = 0; i < members.size(); ++i) {
    for (size_t j = i + 1; j < members.size(); ++j) {
      d = std::max(d, std::abs(values(members[i]) - values(members[j])));
    }
  }
  return d;
}

// A cluster wider than a perturbed multiple eigenvalue can be is split until
// it falls apart; a tight cluster is read as semisimple or as one Jordan chain.
ClusterResult resolve(const Context& ctx, const std::vector<int>& members) {
  ClusterResult out;
  const int k = static_cast<int>(members.size());
  if (k == 1) {
    out.columns.push_back(singleton(ctx, members[0]));
    return out;
  }

  const double spread = diameter(ctx.values, members);
  auto split = [&]() {
    double radius = spread / 2.0;
    auto groups = single_linkage(ctx.values, members, radius);
    while (groups.size() == 1) {
      radius /= 2.0;
      groups = single_linkage(ctx.values, members, radius);
    }
    for (const auto& group : groups) {
      auto sub = resolve(ctx, group);
      out.unresolved = out.unresolved || sub.unresolved;
      for (auto& c : sub.columns) out.columns.push_back(std::move(c));
    }
  };
  cplx mu = 0.0;
  for (int i : members) mu += ctx.values(i);
  mu /= static_cast<double>(k);

  // A split multiple eigenvalue sits on a circle around its mean.
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0.0;
  for (int i : members) {
    const double r = std::abs(ctx.values(i) - mu);
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
  }
  const bool round = r_max <= ctx.opt.structure_tol * ctx.scale || r_min >= 0.5 * r_max;
  if (spread > tight_spread(ctx, k) || !round) {
    split();
    return out;
  }
  const bool real_cluster = std::abs(mu.imag()) <= ctx.opt.pair_tol * ctx.scale;
  if (real_cluster) mu = cplx(mu.real(), 0.0);

  const Eigen::Index dim = ctx.A.rows();
  const MatC M = ctx.Ac - mu * MatC::Identity(dim, dim);
  Eigen::BDCSVD<MatC> svd;
  MatR Mr;
  Eigen::BDCSVD<MatR> svd_r;
  VecR sv;
  if (real_cluster) {
    Mr = ctx.A - mu.real() * MatR::Identity(dim, dim);
    svd_r.compute(Mr, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sv = svd_r.singularValues();
  } else {
    svd.compute(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sv = svd.singularValues();
  }
  // The mean of a perturbed multiple eigenvalue is accurate to rounding, so
  // the structural cutoff does not depend on the spread.
  const double null_cut = ctx.opt.structure_tol * ctx.scale;
  int nullity = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= null_cut) ++nullity;
  }
  auto right = [&](Eigen::Index i) -> VecC {
    return real_cluster ? VecC(svd_r.matrixV().col(i).cast<cplx>()) : VecC(svd.matrixV().col(i));
  };

  if (nullity == k) {
    for (int j = 0; j < k; ++j) {
      Column c;
      c.lambda = mu;
      c.vector = right(dim - 1 - j);
      canonicalize(c.vector);
      out.columns.push_back(std::move(c));
    }
    return out;
  }

  if (nullity == 1) {
    // Jordan chain: (A - mu I) v_j = v_{j-1}, minimum-norm solutions.
    std::vector<VecC> chain;
    VecC head = right(dim - 1);
    canonicalize(head);
    chain.push_back(head);
    const Eigen::Index r = dim - 1;
    bool ok = true;
    for (int j = 1; j < k && ok; ++j) {
      VecC w;
      if (real_cluster) {
        const VecR rhs = chain.back().real();
        const VecR coeff = svd_r.matrixU().leftCols(r).transpose() * rhs;
        const VecR sol = svd_r.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal() * coeff;
        w = sol.cast<cplx>();
      } else {
        const VecC coeff = svd.matrixU().leftCols(r).adjoint() * chain.back();
        w = svd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().cast<cplx>().asDiagonal() * coeff;
      }
      const double resid = (M * w - chain.back()).norm();
      ok = std::isfinite(resid) && resid <= 1e-6 * ctx.scale * std::max(1.0, w.norm());
      if (ok) chain.push_back(std::move(w));
    }
    if (ok) {
      for (int j = 0; j < k; ++j) {
        Column c;
        c.lambda = mu;
        c.vector = chain[j];
        c.chain_position = j;
        c.defective = true;
        out.columns.push_back(std::move(c));
      }
      return out;
    }
  }

  // No recognizable structure: distinct eigenvalues that merely sit close
  // together, unless they are too close to separate.
  if (spread > ctx.opt.structure_tol * ctx.scale) {
    split();
    return out;
  }
  // Several chains, or a chain the solves could not reproduce: keep the
  // solver's vectors and flag the defect.
  for (int i : members) {
    Column c = singleton(ctx, i);
    c.defective = true;
    out.columns.push_back(std::move(c));
  }
  out.unresolved = true;
  return out;
}

}  // namespace

SpectralData decompose(const MatR& A, const SpectrumOptions& options) {
  if (A.rows() != A.cols()) throw Error(ErrorKind::InvalidInput, "decompose: matrix not square");
  if (!A.allFinite()) throw Error(ErrorKind::InvalidInput, "decompose: non-finite entries");
  const Eigen::Index dim = A.rows();

  SpectralData sd;
  sd.matrix_norm = norm2(A);
  if (dim == 0) return sd;

  Eigen::EigenSolver<MatR> es(A, true);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::IllConditioned, "eigenvalue iteration did not converge");
  }
  Context ctx{A, A.cast<cplx>(), std::max(1.0, sd.matrix_norm), options, es.eigenvalues(),
              es.eigenvectors()};

  const double snap = options.pair_tol * ctx.scale;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (std::abs(ctx.values(i).imag()) <= snap) ctx.values(i) = cplx(ctx.values(i).real(), 0.0);
  }

  std::vector<int> all(dim);
  std::iota(all.begin(), all.end(), 0);
  const double radius = options.cluster_radius * ctx.scale;
  std::vector<Column> columns;

  // Clusters are handled once per conjugate class: self-conjugate clusters in
  // real arithmetic, upper-half-plane clusters mirrored onto their partners.
  for (const auto& group : single_linkage(ctx.values, all, radius)) {
    cplx mean = 0.0;
    for (int i : group) mean += ctx.values(i);
    mean /= static_cast<double>(group.size());
    if (mean.imag() < -snap) continue;

    auto res = resolve(ctx, group);
    sd.unresolved_defect = sd.unresolved_defect || res.unresolved;
    const bool mirror = mean.imag() > snap;
    const int base = static_cast<int>(columns.size());
    const int k = static_cast<int>(res.columns.size());
    for (auto& c : res.columns) columns.push_back(c);
    if (mirror) {
      for (int j = 0; j < k; ++j) {
        Column c = res.columns[j];
        c.lambda = std::conj(c.lambda);
        c.vector = c.vector.conjugate();
        c.partner = base + j;
        columns[base + j].partner = base + k + j;
        columns.push_back(std::move(c));
      }
    } else {
      // Inside a self-conjugate cluster, singletons may still be complex pairs.
      for (int j = 0; j < k; ++j) {
        Column& c = columns[base + j];
        if (c.lambda.imag() == 0.0) {
          c.partner = base + j;
          continue;
        }
        if (c.partner >= 0 || c.lambda.imag() < 0.0) continue;
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i) {
          Column& o = columns[base + i];
          if (o.partner >= 0 || o.lambda.imag() >= 0.0) continue;
          const double d = std::abs(o.lambda - std::conj(c.lambda));
          if (d < best_d) {
            best_d = d;
            best = base + i;
          }
        }
        if (best < 0) throw Error(ErrorKind::IllConditioned, "unpaired complex eigenvalue");
        columns[best].lambda = std::conj(c.lambda);
        columns[best].vector = c.vector.conjugate();
        columns[best].chain_position = c.chain_position;
        columns[best].defective = c.defective;
        columns[best].partner = base + j;
        c.partner = best;
      }
    }
  }
  if (static_cast<Eigen::Index>(columns.size()) != dim) {
    throw Error(ErrorKind::IllConditioned, "spectral bookkeeping lost a column");
  }

  // Descending real part, then descending imaginary part; stable so chains
  // and repeated eigenvalues keep their construction order.
  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const cplx la = columns[a].lambda;
    const cplx lb = columns[b].lambda;
    if (la.real() != lb.real()) return la.real() > lb.real();
    return la.imag() > lb.imag();
  });
  std::vector<int> where(dim);
  for (Eigen::Index i = 0; i < dim; ++i) where[order[i]] = static_cast<int>(i);

  sd.eigenvalues.resize(dim);
  sd.modal.resize(dim, dim);
  sd.pairing.resize(dim);
  sd.defective.resize(dim);
  sd.chain_position.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Column& c = columns[order[i]];
    sd.eigenvalues(i) = c.lambda;
    sd.modal.col(i) = c.vector;
    sd.pairing[i] = where[c.partner];
    sd.defective[i] = c.defective;
    sd.chain_position[i] = c.chain_position;
  }
  sd.condition = condition_number(sd.modal);
  return sd;
}

double stacked_deviation(const VecC& v, cplx lambda, int nodes, int order) {
  double worst = 0.0;
  cplx power = 1.0;
  for (int k = 1; k < order; ++k) {
    power *= lambda;
    for (int j = 0; j < nodes; ++j) {
      worst = std::max(worst, std::abs(v(k * nodes + j) - power * v(j)));
    }
  }
  return worst;
}

std::vector<double> check_stacked_structure(const SpectralData& sd, int nodes, int order) {
  if (sd.size() != static_cast<Eigen::Index>(nodes) * order) {
    throw Error(ErrorKind::InvalidInput, "structure check: dimension is not nodes * order");
  }
  std::vector<double> out(sd.size());
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    out[i] = sd.is_eigenvector(i)
                 ? stacked_deviation(sd.modal.col(i), sd.eigenvalues(i), nodes, order)
                 : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double max_stacked_deviation(const SpectralData& sd, int nodes, int order) {
  double worst = 0.0;
  for (double d : check_stacked_structure(sd, nodes, order)) {
    if (!std::isnan(d)) worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace obsblock

namespace obsblock {

double spectrum_match_error(const VecC& a, const VecC& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidInput, "spectra differ in length");
  const int n = static_cast<int>(a.size());
  if (n == 0) return 0.0;
  // Hungarian method (potentials form), 1-based internals.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto cost = [&](int i, int j) { return std::abs(a(i - 1) - b(j - 1)); };
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double worst = 0.0;
  for (int j = 1; j <= n; ++j) worst = std::max(worst, cost(match[j], j));
  return worst;
}

}  // namespace obsblock
