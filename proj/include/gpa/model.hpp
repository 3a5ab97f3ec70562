#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpa/estimate.hpp"
#include "gpa/grid.hpp"
#include "gpa/moments.hpp"

namespace gpa {

// =============================================================================
// Grid-fitted model and interpolation
// =============================================================================
//
// The model is the full-sample ratio estimator evaluated on the design grid
// only. Prediction interpolates the stored grid values, so it needs no
// further access to the data:
//
//   linear (nu = 1)  weights (x_{j+1} - x)/D and (x - x_j)/D on the
//                    containing segment, D the grid spacing
//   order nu         Lagrange basis over the nu+1 grid points nearest x,
//                    q_k(x) = prod_{i != k} (x - x_i)/(x_k - x_i)
//   p-variate        barycentric weights on the staircase simplex of the
//                    containing lattice cell
//
// Undefined grid values do not poison the model; only queries whose
// interpolation window touches one come back Undefined.

struct ModelMeta {
  std::int64_t n_train = 0;
  int machines = 1;
  std::string fitted_at;  // ISO-8601 when SOURCE_DATE_EPOCH is set, else ""
};

struct GpaModel {
  int dim = 1;
  Grid axis;  // shared by all axes when dim > 1
  int nu = 1;
  double h = 0.0;
  std::string kernel_id;
  std::vector<double> values;          // (J+1)^dim, row-major multi-index
  std::vector<std::uint8_t> undefined;  // 1 where the grid fit was Undefined
  ModelMeta meta;

  std::int64_t points_per_axis() const { return axis.point_count(); }
  std::int64_t value_count() const;
  void validate() const;  // throws std::invalid_argument on inconsistency
};

// Grid values from merged moment sums (entry j pairs with grid point j in
// row-major multi-index order over (J+1)^dim lattice points).
GpaModel fit_grid(const MomentStats& merged, const Grid& axis, int dim,
                  const KernelSpec& kernel, double h, int nu,
                  ModelMeta meta = {});

// Out-of-support bookkeeping for a batch of queries.
struct PredictFlags {
  std::int64_t clamped = 0;       // Compact: pulled back to the boundary
  std::int64_t out_of_range = 0;  // Diverging: answered with 0
};

// Linear interpolation on the containing segment.
Estimate predict_linear(const GpaModel& model, double x,
                        PredictFlags* flags = nullptr);

// Lagrange basis over an arbitrary point set; throws on duplicate points.
// The weights sum to 1 for every x.
std::vector<double> lagrange_coeffs(double x, std::span<const double> pts);

// Order-nu interpolation over the nu+1 nearest grid points. The window
// starts at the containing segment and grows toward the nearer neighbor
// (ties to the lower index), shifting inward at the boundary.
Estimate predict_poly(const GpaModel& model, double x, int nu,
                      PredictFlags* flags = nullptr);
// Uses the model's own order.
Estimate predict(const GpaModel& model, double x,
                 PredictFlags* flags = nullptr);

// Containing-cell simplex of the staircase (Kuhn) triangulation plus the
// barycentric weights of x in it. Vertices are flat row-major lattice
// indices. Throws std::out_of_range when x leaves the bounding box.
struct SimplexCell {
  std::vector<std::int64_t> vertices;  // dim+1 entries
  std::vector<double> weights;         // nonnegative up to 1e-12, sum 1
};
SimplexCell find_simplex(const Grid& axis, int dim, std::span<const double> x);

// Barycentric interpolation of the model values at a p-variate query.
Estimate predict_multi(const GpaModel& model, std::span<const double> x);

// Pick the interpolation order by validation RMPE. Models whose predictions
// are all Undefined on the validation set are excluded; if none remain the
// call throws std::runtime_error. Ties go to the smaller order.
struct OrderSelection {
  int best_nu = 0;
  std::size_t best_index = 0;
  struct Row {
    int nu;
    double rmpe;
    std::int64_t n_undefined;
    bool usable;
  };
  std::vector<Row> table;
};
OrderSelection select_order(std::span<const GpaModel> candidates,
                            const Sample& validation);

}  // namespace gpa
