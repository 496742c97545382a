#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace radiotomo {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Axis-aligned rectangle; used for the monitored area A.
struct Rect {
  Point lo;
  Point hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double perimeter() const { return 2.0 * (width() + height()); }
  bool contains(Point p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  /// Point at arc length `s` along the boundary, counter-clockwise from `lo`.
  Point boundary_point(double s) const;
};

/// Regular nx-by-ny lattice of grid points.
///
/// Grid point (a, b), 0 <= a < nx, 0 <= b < ny, sits at
/// origin + (a, b) * spacing and has linear index i = a + nx * b. This is the
/// column-stacking vec() of the nx-by-ny array F with F(a, b) = f[i], so
/// every vector over the grid can be reshaped with unvec() and back.
///
/// The area A extends half a spacing beyond the outermost points, so a
/// 60x60 unit grid with origin (1, 1) covers [0.5, 60.5]^2.
class Grid {
 public:
  Grid(std::size_t nx, std::size_t ny, double spacing = 1.0, Point origin = {1.0, 1.0});

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  double spacing() const { return spacing_; }
  Point origin() const { return origin_; }

  std::size_t index(std::size_t a, std::size_t b) const { return a + nx_ * b; }
  std::size_t col_of(std::size_t i) const { return i % nx_; }
  std::size_t row_of(std::size_t i) const { return i / nx_; }
  Point point(std::size_t i) const;
  Point point(std::size_t a, std::size_t b) const;

  Rect area() const;

  /// 4-connected neighbors of site i (2, 3 or 4 of them), written to `out`.
  /// Returns the count.
  std::size_t neighbors(std::size_t i, std::size_t out[4]) const;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double spacing_;
  Point origin_;
};

/// Column-stacking vectorization of an nx-by-ny array.
std::vector<double> vec(const Eigen::MatrixXd& array);
Eigen::MatrixXd unvec(std::span<const double> values, std::size_t nx, std::size_t ny);

class SensorSet {
 public:
  /// Requires at least two sensors at pairwise distinct positions.
  explicit SensorSet(std::vector<Point> positions);

  std::size_t size() const { return positions_.size(); }
  Point operator[](std::size_t n) const { return positions_[n]; }
  const std::vector<Point>& positions() const { return positions_; }

 private:
  std::vector<Point> positions_;
};

/// Ordered sensor pair (transmitter, receiver); indices are 0-based.
struct Link {
  std::size_t tx = 0;
  std::size_t rx = 0;

  friend bool operator==(const Link&, const Link&) = default;
  friend auto operator<=>(const Link&, const Link&) = default;
};

/// Throws InvalidArgument unless tx != rx and both index into `sensors`.
void validate_link(const Link& link, const SensorSet& sensors);

/// Normalized ellipse model: 1/sqrt(d(tx, rx)) when the detour through
/// `point` is strictly shorter than lambda / 2, otherwise 0.
double ellipse_weight(Point tx, Point rx, Point point, double lambda);

/// Sparse vector over the grid, indices strictly increasing.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
  bool empty() const { return index.empty(); }
  std::vector<double> dense() const;
  double dot(std::span<const double> x) const;
  double squared_norm() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

SparseVector weight_vector(Point tx, Point rx, const Grid& grid, double lambda);
SparseVector weight_vector(const Link& link, const Grid& grid, const SensorSet& sensors,
                           double lambda);

/// Columns w_1..w_t of the N_g-by-t weight matrix, grown by append().
class WeightMatrix {
 public:
  WeightMatrix(std::size_t rows, double lambda);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }
  double lambda() const { return lambda_; }

  void append(SparseVector column);
  const SparseVector& column(std::size_t tau) const { return columns_[tau]; }
  const std::vector<SparseVector>& columns() const { return columns_; }

  Eigen::MatrixXd dense() const;

 private:
  std::size_t rows_;
  double lambda_;
  std::vector<SparseVector> columns_;
};

}  // namespace radiotomo
