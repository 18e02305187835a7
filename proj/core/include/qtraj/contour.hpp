#pragma once

#include <cstddef>

namespace qtraj {

enum class Branch { Forward, Backward };

struct ContourNode {
  Branch branch;
  double time;
};

// Discretized Keldysh contour with 2P+2 nodes. Node l <= P sits on the
// forward branch at time l*dt; node l >= P+1 sits on the backward branch at
// time (2P+1-l)*dt. Contour order is node-index order, and the turning point
// time t_final is carried by both node P and node P+1.
class ContourGrid {
 public:
  ContourGrid(double t_final, std::size_t steps);

  double t_final() const { return t_final_; }
  std::size_t steps() const { return steps_; }
  double dt() const { return dt_; }
  std::size_t size() const { return 2 * steps_ + 2; }

  ContourNode node(std::size_t l) const;
  double time(std::size_t l) const { return node(l).time; }
  Branch branch(std::size_t l) const { return node(l).branch; }

  // +1 on the forward branch, -1 on the backward branch (sign of d tau / dt).
  double branch_sign(std::size_t l) const;

  // Node carrying real time step j on the given branch, j in [0, P].
  std::size_t forward_node(std::size_t j) const;
  std::size_t backward_node(std::size_t j) const;

  // Real-time step index of a node (0..P).
  std::size_t time_index(std::size_t l) const;

 private:
  void check_index(std::size_t l) const;

  double t_final_;
  std::size_t steps_;
  double dt_;
};

ContourGrid build_contour(double t_final, long long steps);

// True iff l1 is strictly later than l2 along the contour.
bool contour_later(const ContourGrid& grid, std::size_t l1, std::size_t l2);

}  // namespace qtraj
