#include "gpa/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gpa {

namespace {

Estimate node_value(const GpaModel& m, std::int64_t flat) {
  if (m.undefined[static_cast<std::size_t>(flat)]) return std::nullopt;
  return m.values[static_cast<std::size_t>(flat)];
}

// Clamp or zero out-of-support univariate queries per the grid's mode.
// Returns false when the query was already answered (diverging, out of
// range -> *answer = 0).
bool resolve_support(const Grid& axis, double* x, PredictFlags* flags) {
  if (*x >= axis.lo() && *x <= axis.hi()) return true;
  if (axis.mode() == SupportMode::Diverging) {
    if (flags) ++flags->out_of_range;
    return false;
  }
  if (flags) ++flags->clamped;
  *x = std::clamp(*x, axis.lo(), axis.hi());
  return true;
}

}  // namespace

std::int64_t GpaModel::value_count() const {
  std::int64_t count = 1;
  for (int s = 0; s < dim; ++s) {
    if (count > (1LL << 62) / points_per_axis()) {
      throw std::invalid_argument("model: lattice size overflows");
    }
    count *= points_per_axis();
  }
  return count;
}

void GpaModel::validate() const {
  if (dim < 1) throw std::invalid_argument("model: dimension must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("model: bandwidth must be positive");
  if (nu < 1) throw std::invalid_argument("model: order must be >= 1");
  const auto count = static_cast<std::size_t>(value_count());
  if (values.size() != count || undefined.size() != count) {
    throw std::invalid_argument("model: value/mask size does not match lattice");
  }
}

GpaModel fit_grid(const MomentStats& merged, const Grid& axis, int dim,
                  const KernelSpec& kernel, double h, int nu, ModelMeta meta) {
  GpaModel model{dim, axis, nu, h, kernel.id(), {}, {}, std::move(meta)};
  const auto count = static_cast<std::size_t>(model.value_count());
  if (merged.size() != count) {
    throw std::invalid_argument("fit_grid: stats do not cover the lattice");
  }
  model.values.resize(count, 0.0);
  model.undefined.resize(count, 0);
  for (std::size_t j = 0; j < count; ++j) {
    const Estimate e = nw_from_stats(merged, j);
    if (e.has_value()) {
      model.values[j] = *e;
    } else {
      model.undefined[j] = 1;
    }
  }
  model.validate();
  return model;
}

Estimate predict_linear(const GpaModel& model, double x, PredictFlags* flags) {
  if (model.dim != 1) {
    throw std::invalid_argument("predict_linear: univariate models only");
  }
  if (!resolve_support(model.axis, &x, flags)) return 0.0;
  const std::int64_t j = model.axis.locate(x);
  const double xj = model.axis.point(j);
  const double xj1 = model.axis.point(j + 1);
  // Exact grid hits take the stored value even when a neighbor is Undefined.
  if (x == xj) return node_value(model, j);
  if (x == xj1) return node_value(model, j + 1);
  if (model.undefined[static_cast<std::size_t>(j)] ||
      model.undefined[static_cast<std::size_t>(j + 1)]) {
    return std::nullopt;
  }
  const double spacing = model.axis.spacing();
  const double w_left = (xj1 - x) / spacing;
  const double w_right = (x - xj) / spacing;
  return w_left * model.values[static_cast<std::size_t>(j)] +
         w_right * model.values[static_cast<std::size_t>(j + 1)];
}

std::vector<double> lagrange_coeffs(double x, std::span<const double> pts) {
  if (pts.empty()) {
    throw std::invalid_argument("lagrange_coeffs: empty point set");
  }
  std::vector<double> w(pts.size(), 1.0);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == k) continue;
      const double denom = pts[k] - pts[i];
      if (denom == 0.0) {
        throw std::invalid_argument("lagrange_coeffs: duplicate points");
      }
      w[k] *= (x - pts[i]) / denom;
    }
  }
  return w;
}

Estimate predict_poly(const GpaModel& model, double x, int nu,
                      PredictFlags* flags) {
  if (model.dim != 1) {
    throw std::invalid_argument("predict_poly: univariate models only");
  }
  const std::int64_t segments = model.axis.segments();
  if (nu < 1 || nu > segments) {
    throw std::invalid_argument(
        "predict_poly: order needs 1 <= nu <= grid segment count");
  }
  if (!resolve_support(model.axis, &x, flags)) return 0.0;

  const std::int64_t j = model.axis.locate(x);
  if (x == model.axis.point(j)) return node_value(model, j);
  if (x == model.axis.point(j + 1)) return node_value(model, j + 1);

  // Grow the window [first, last] from the containing segment toward the
  // nearer neighbor; equal distances extend left (lower index).
  std::int64_t first = j, last = j + 1;
  while (last - first < nu) {
    if (first == 0) {
      ++last;
    } else if (last == segments) {
      --first;
    } else {
      const double d_left = x - model.axis.point(first - 1);
      const double d_right = model.axis.point(last + 1) - x;
      if (d_left <= d_right) {
        --first;
      } else {
        ++last;
      }
    }
  }

  std::vector<double> pts(static_cast<std::size_t>(nu) + 1);
  for (std::int64_t k = first; k <= last; ++k) {
    if (model.undefined[static_cast<std::size_t>(k)]) return std::nullopt;
    pts[static_cast<std::size_t>(k - first)] = model.axis.point(k);
  }
  const std::vector<double> w = lagrange_coeffs(x, pts);
  long double acc = 0.0L;
  for (std::int64_t k = first; k <= last; ++k) {
    acc += static_cast<long double>(w[static_cast<std::size_t>(k - first)]) *
           model.values[static_cast<std::size_t>(k)];
  }
  return static_cast<double>(acc);
}

Estimate predict(const GpaModel& model, double x, PredictFlags* flags) {
  if (model.nu == 1) return predict_linear(model, x, flags);
  return predict_poly(model, x, model.nu, flags);
}

SimplexCell find_simplex(const Grid& axis, int dim,
                         std::span<const double> x) {
  if (dim < 1 || x.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("find_simplex: query/dimension mismatch");
  }
  for (double c : x) {
    if (c < axis.lo() || c > axis.hi()) {
      throw std::out_of_range("find_simplex: query outside the lattice box");
    }
  }
  const double spacing = axis.spacing();
  std::vector<std::int64_t> cell(static_cast<std::size_t>(dim));
  std::vector<double> frac(static_cast<std::size_t>(dim));
  for (int s = 0; s < dim; ++s) {
    const auto su = static_cast<std::size_t>(s);
    cell[su] = axis.locate(x[su]);
    frac[su] = (x[su] - axis.point(cell[su])) / spacing;
  }

  // Staircase triangulation: walk the cell diagonal adding axis steps in
  // decreasing fractional-coordinate order (stable -> ties take the lower
  // axis). The consecutive differences of the sorted fractions are exactly
  // the barycentric weights.
  std::vector<int> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return frac[static_cast<std::size_t>(a)] > frac[static_cast<std::size_t>(b)];
  });

  std::vector<std::int64_t> stride(static_cast<std::size_t>(dim), 1);
  for (int s = dim - 2; s >= 0; --s) {
    stride[static_cast<std::size_t>(s)] =
        stride[static_cast<std::size_t>(s) + 1] * axis.point_count();
  }
  std::int64_t base = 0;
  for (int s = 0; s < dim; ++s) {
    base += cell[static_cast<std::size_t>(s)] * stride[static_cast<std::size_t>(s)];
  }

  SimplexCell simplex;
  simplex.vertices.resize(static_cast<std::size_t>(dim) + 1);
  simplex.weights.resize(static_cast<std::size_t>(dim) + 1);
  simplex.vertices[0] = base;
  simplex.weights[0] = 1.0 - frac[static_cast<std::size_t>(order[0])];
  std::int64_t vertex = base;
  for (int k = 0; k < dim; ++k) {
    const auto axis_k = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
    vertex += stride[axis_k];
    simplex.vertices[static_cast<std::size_t>(k) + 1] = vertex;
    const double t_k = frac[axis_k];
    const double t_next =
        k + 1 < dim ? frac[static_cast<std::size_t>(order[static_cast<std::size_t>(k) + 1])]
                    : 0.0;
    simplex.weights[static_cast<std::size_t>(k) + 1] = t_k - t_next;
  }
  return simplex;
}

Estimate predict_multi(const GpaModel& model, std::span<const double> x) {
  if (model.dim < 2) {
    throw std::invalid_argument("predict_multi: needs a lattice model (dim >= 2)");
  }
  const SimplexCell cell = find_simplex(model.axis, model.dim, x);
  // Exact lattice hits keep their stored value regardless of neighbors.
  bool exact = true;
  for (std::size_t k = 1; k < cell.weights.size() && exact; ++k) {
    exact = cell.weights[k] == 0.0;
  }
  if (exact) return node_value(model, cell.vertices[0]);
  long double acc = 0.0L;
  for (std::size_t k = 0; k < cell.vertices.size(); ++k) {
    const auto flat = static_cast<std::size_t>(cell.vertices[k]);
    if (model.undefined[flat]) return std::nullopt;
    acc += static_cast<long double>(cell.weights[k]) * model.values[flat];
  }
  return static_cast<double>(acc);
}

OrderSelection select_order(std::span<const GpaModel> candidates,
                            const Sample& validation) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_order: no candidate models");
  }
  OrderSelection sel;
  bool have_best = false;
  double best_rmpe = 0.0;
  for (std::size_t m = 0; m < candidates.size(); ++m) {
    const GpaModel& model = candidates[m];
    if (model.dim != validation.dim()) {
      throw std::invalid_argument("select_order: validation dimension mismatch");
    }
    long double sq = 0.0L;
    std::int64_t used = 0, undefined = 0;
    for (std::int64_t i = 0; i < validation.size(); ++i) {
      Estimate e;
      if (model.dim == 1) {
        e = predict_poly(model, validation.x(i), model.nu);
      } else {
        std::vector<double> q(static_cast<std::size_t>(model.dim));
        for (int s = 0; s < model.dim; ++s) {
          q[static_cast<std::size_t>(s)] = validation.x(i, s);
        }
        e = predict_multi(model, q);
      }
      if (!e.has_value()) {
        ++undefined;
        continue;
      }
      const double r = *e - validation.y(i);
      sq += static_cast<long double>(r) * r;
      ++used;
    }
    OrderSelection::Row row{model.nu, 0.0, undefined, used > 0};
    if (used > 0) {
      row.rmpe = std::sqrt(static_cast<double>(sq / used));
      const bool better =
          !have_best || row.rmpe < best_rmpe ||
          (row.rmpe == best_rmpe && model.nu < sel.best_nu);
      if (better) {
        have_best = true;
        best_rmpe = row.rmpe;
        sel.best_nu = model.nu;
        sel.best_index = m;
      }
    }
    sel.table.push_back(row);
  }
  if (!have_best) {
    throw std::runtime_error(
        "select_order: every candidate was Undefined on the validation set");
  }
  return sel;
}

}  // namespace gpa
