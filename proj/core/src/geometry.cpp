#include "radiotomo/geometry.hpp"

#include "radiotomo/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace radiotomo {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point Rect::boundary_point(double s) const {
  const double w = width();
  const double h = height();
  s = std::fmod(s, perimeter());
  if (s < 0.0) s += perimeter();
  if (s < w) return {lo.x + s, lo.y};
  s -= w;
  if (s < h) return {hi.x, lo.y + s};
  s -= h;
  if (s < w) return {hi.x - s, hi.y};
  s -= w;
  return {lo.x, hi.y - s};
}

Grid::Grid(std::size_t nx, std::size_t ny, double spacing, Point origin)
    : nx_(nx), ny_(ny), spacing_(spacing), origin_(origin) {
  if (nx == 0 || ny == 0) throw InvalidArgument("grid dimensions must be positive");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw InvalidArgument("grid spacing must be positive and finite");
  if (nx * ny > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("grid too large");
}

Point Grid::point(std::size_t a, std::size_t b) const {
  return {origin_.x + static_cast<double>(a) * spacing_,
          origin_.y + static_cast<double>(b) * spacing_};
}

Point Grid::point(std::size_t i) const { return point(col_of(i), row_of(i)); }

Rect Grid::area() const {
  const double h = 0.5 * spacing_;
  const Point last = point(nx_ - 1, ny_ - 1);
  return {{origin_.x - h, origin_.y - h}, {last.x + h, last.y + h}};
}

std::size_t Grid::neighbors(std::size_t i, std::size_t out[4]) const {
  const std::size_t a = col_of(i);
  const std::size_t b = row_of(i);
  std::size_t n = 0;
  if (a > 0) out[n++] = i - 1;
  if (a + 1 < nx_) out[n++] = i + 1;
  if (b > 0) out[n++] = i - nx_;
  if (b + 1 < ny_) out[n++] = i + nx_;
  return n;
}

std::vector<double> vec(const Eigen::MatrixXd& array) {
  std::vector<double> out(static_cast<std::size_t>(array.size()));
  Eigen::Map<Eigen::MatrixXd>(out.data(), array.rows(), array.cols()) = array;
  return out;
}

Eigen::MatrixXd unvec(std::span<const double> values, std::size_t nx, std::size_t ny) {
  if (values.size() != nx * ny)
    throw InvalidArgument("unvec: expected " + std::to_string(nx * ny) + " values, got " +
                          std::to_string(values.size()));
  return Eigen::Map<const Eigen::MatrixXd>(values.data(), static_cast<Eigen::Index>(nx),
                                           static_cast<Eigen::Index>(ny));
}

SensorSet::SensorSet(std::vector<Point> positions) : positions_(std::move(positions)) {
  if (positions_.size() < 2) throw InvalidArgument("at least two sensors are required");
  for (std::size_t n = 0; n < positions_.size(); ++n) {
    if (!std::isfinite(positions_[n].x) || !std::isfinite(positions_[n].y))
      throw InvalidArgument("sensor " + std::to_string(n) + " has a non-finite position");
    for (std::size_t m = 0; m < n; ++m) {
      if (positions_[n] == positions_[m])
        throw InvalidArgument("sensors " + std::to_string(m) + " and " + std::to_string(n) +
                              " share a position");
    }
  }
}

void validate_link(const Link& link, const SensorSet& sensors) {
  if (link.tx >= sensors.size() || link.rx >= sensors.size())
    throw InvalidArgument("link references sensor outside [0, " +
                          std::to_string(sensors.size()) + ")");
  if (link.tx == link.rx) throw InvalidArgument("link endpoints must differ");
}

double ellipse_weight(Point tx, Point rx, Point point, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("ellipse lambda must be positive");
  const double d = distance(tx, rx);
  if (d == 0.0) throw InvalidArgument("invalid link: coincident transmitter and receiver");
  const double detour = distance(tx, point) + distance(rx, point);
  return detour < d + 0.5 * lambda ? 1.0 / std::sqrt(d) : 0.0;
}

std::vector<double> SparseVector::dense() const {
  std::vector<double> out(dim, 0.0);
  for (std::size_t j = 0; j < index.size(); ++j) out[index[j]] = value[j];
  return out;
}

double SparseVector::dot(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < index.size(); ++j) acc += value[j] * x[index[j]];
  return acc;
}

double SparseVector::squared_norm() const {
  double acc = 0.0;
  for (double v : value) acc += v * v;
  return acc;
}

SparseVector weight_vector(Point tx, Point rx, const Grid& grid, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("ellipse lambda must be positive");
  const double d = distance(tx, rx);
  if (d == 0.0) throw InvalidArgument("invalid link: coincident transmitter and receiver");

  // Bounding box of the ellipse {p : |p - tx| + |p - rx| < d + lambda/2},
  // padded so that the exact test below decides every boundary case.
  const double semi_major = 0.5 * (d + 0.5 * lambda);
  const double semi_minor = std::sqrt(std::max(0.0, semi_major * semi_major - 0.25 * d * d));
  const double c = (rx.x - tx.x) / d;
  const double s = (rx.y - tx.y) / d;
  const double half_w = std::sqrt(semi_major * semi_major * c * c + semi_minor * semi_minor * s * s);
  const double half_h = std::sqrt(semi_major * semi_major * s * s + semi_minor * semi_minor * c * c);
  const Point mid{0.5 * (tx.x + rx.x), 0.5 * (tx.y + rx.y)};
  const double pad = grid.spacing();

  auto index_range = [&](double lo, double hi, double origin, std::size_t n) {
    const double h = grid.spacing();
    const double first = std::ceil((lo - pad - origin) / h);
    const double last = std::floor((hi + pad - origin) / h);
    const double clamped_first = std::max(0.0, first);
    const double clamped_last = std::min(static_cast<double>(n) - 1.0, last);
    return std::pair<double, double>{clamped_first, clamped_last};
  };
  const auto [a0, a1] = index_range(mid.x - half_w, mid.x + half_w, grid.origin().x, grid.nx());
  const auto [b0, b1] = index_range(mid.y - half_h, mid.y + half_h, grid.origin().y, grid.ny());

  SparseVector out;
  out.dim = grid.size();
  if (a0 > a1 || b0 > b1) return out;

  const double inside = 1.0 / std::sqrt(d);
  const double bound = d + 0.5 * lambda;
  for (auto b = static_cast<std::size_t>(b0); b <= static_cast<std::size_t>(b1); ++b) {
    for (auto a = static_cast<std::size_t>(a0); a <= static_cast<std::size_t>(a1); ++a) {
      const Point p = grid.point(a, b);
      if (distance(tx, p) + distance(rx, p) < bound) {
        out.index.push_back(static_cast<std::uint32_t>(grid.index(a, b)));
        out.value.push_back(inside);
      }
    }
  }
  return out;
}

SparseVector weight_vector(const Link& link, const Grid& grid, const SensorSet& sensors,
                           double lambda) {
  validate_link(link, sensors);
  return weight_vector(sensors[link.tx], sensors[link.rx], grid, lambda);
}

WeightMatrix::WeightMatrix(std::size_t rows, double lambda) : rows_(rows), lambda_(lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("ellipse lambda must be positive");
}

void WeightMatrix::append(SparseVector column) {
  if (column.dim != rows_)
    throw InvalidArgument("weight column has dimension " + std::to_string(column.dim) +
                          ", expected " + std::to_string(rows_));
  columns_.push_back(std::move(column));
}

Eigen::MatrixXd WeightMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                               static_cast<Eigen::Index>(columns_.size()));
  for (std::size_t tau = 0; tau < columns_.size(); ++tau) {
    const auto& col = columns_[tau];
    for (std::size_t j = 0; j < col.nnz(); ++j)
      out(col.index[j], static_cast<Eigen::Index>(tau)) = col.value[j];
  }
  return out;
}

}  // namespace radiotomo
