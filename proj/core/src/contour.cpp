#include "qtraj/contour.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qtraj {

ContourGrid::ContourGrid(double t_final, std::size_t steps)
    : t_final_(t_final), steps_(steps), dt_(0.0) {
  if (!(t_final > 0.0) || !std::isfinite(t_final))
    throw std::invalid_argument("contour: t_final must be positive and finite");
  if (steps == 0) throw std::invalid_argument("contour: steps must be positive");
  dt_ = t_final / static_cast<double>(steps);
}

void ContourGrid::check_index(std::size_t l) const {
  if (l >= size())
    throw std::out_of_range("contour node " + std::to_string(l) + " out of range [0, " +
                            std::to_string(size()) + ")");
}

ContourNode ContourGrid::node(std::size_t l) const {
  check_index(l);
  if (l <= steps_) return {Branch::Forward, static_cast<double>(l) * dt_};
  return {Branch::Backward, static_cast<double>(2 * steps_ + 1 - l) * dt_};
}

double ContourGrid::branch_sign(std::size_t l) const {
  check_index(l);
  return l <= steps_ ? 1.0 : -1.0;
}

std::size_t ContourGrid::forward_node(std::size_t j) const {
  if (j > steps_) throw std::out_of_range("time index out of range");
  return j;
}

std::size_t ContourGrid::backward_node(std::size_t j) const {
  if (j > steps_) throw std::out_of_range("time index out of range");
  return 2 * steps_ + 1 - j;
}

std::size_t ContourGrid::time_index(std::size_t l) const {
  check_index(l);
  return l <= steps_ ? l : 2 * steps_ + 1 - l;
}

ContourGrid build_contour(double t_final, long long steps) {
  if (steps <= 0) throw std::invalid_argument("contour: steps must be positive");
  return ContourGrid(t_final, static_cast<std::size_t>(steps));
}

bool contour_later(const ContourGrid& grid, std::size_t l1, std::size_t l2) {
  if (l1 >= grid.size() || l2 >= grid.size())
    throw std::out_of_range("contour node out of range");
  return l1 > l2;
}

}  // namespace qtraj
