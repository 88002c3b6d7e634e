#include "otml/exact_transport.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace otml {

namespace {

struct BasicCell {
  int i, j;
  double alloc;
};

// Positions of a cell within the basis list, indexed by flattened cell id.
constexpr int kAbsent = -1;

}  // namespace

ExactOtResult exact_ot(const DiscreteDistribution& a, const DiscreteDistribution& b,
                       const CostMatrix& cost) {
  const int n = int(a.size()), m = int(b.size());
  if (Index(n) != cost.entries.rows() || Index(m) != cost.entries.cols())
    fail_arg("exact_ot: cost shape mismatch");
  if (n * m > 400) fail_arg("exact_ot: instance above oracle scale (n*m > 400)");
  const Matrix& C = cost.entries;
  if (!C.allFinite()) fail_arg("exact_ot: non-finite cost entry");

  // Northwest-corner start: every step exhausts a row or a column, yielding
  // exactly n+m-1 basic cells (zero allocations appear on degenerate steps).
  std::vector<BasicCell> basis;
  basis.reserve(std::size_t(n + m - 1));
  {
    Vector rem_row = a.weights, rem_col = b.weights;
    int i = 0, j = 0;
    while (true) {
      double take = std::min(rem_row[i], rem_col[j]);
      basis.push_back({i, j, take});
      rem_row[i] -= take;
      rem_col[j] -= take;
      if (i == n - 1 && j == m - 1) break;
      if (rem_row[i] <= rem_col[j] && i < n - 1)
        ++i;
      else if (j < m - 1)
        ++j;
      else
        ++i;
    }
  }

  std::vector<int> cell_pos(std::size_t(n * m), kAbsent);
  for (std::size_t k = 0; k < basis.size(); ++k)
    cell_pos[std::size_t(basis[k].i * m + basis[k].j)] = int(k);

  const double pivot_tol = 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff());
  const int max_pivots = 200 * (n + m) * std::max(n, m);

  std::vector<double> u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(m));
  std::vector<char> u_set(static_cast<std::size_t>(n)), v_set(static_cast<std::size_t>(m));
  // Tree adjacency over basis cells: rows and columns are the two node sets.
  std::vector<std::vector<int>> row_cells(static_cast<std::size_t>(n)),
      col_cells(static_cast<std::size_t>(m));

  int pivots = 0;
  while (true) {
    for (auto& r : row_cells) r.clear();
    for (auto& c : col_cells) c.clear();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      row_cells[std::size_t(basis[k].i)].push_back(int(k));
      col_cells[std::size_t(basis[k].j)].push_back(int(k));
    }

    // Duals from the spanning tree: u_i + v_j = C(i,j) on basic cells.
    std::fill(u_set.begin(), u_set.end(), 0);
    std::fill(v_set.begin(), v_set.end(), 0);
    std::vector<int> stack;
    u[0] = 0.0;
    u_set[0] = 1;
    stack.push_back(0);  // encoded: row r as r, column c as n + c
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      if (node < n) {
        for (int k : row_cells[std::size_t(node)]) {
          int j = basis[std::size_t(k)].j;
          if (!v_set[std::size_t(j)]) {
            v[std::size_t(j)] = C(node, j) - u[std::size_t(node)];
            v_set[std::size_t(j)] = 1;
            stack.push_back(n + j);
          }
        }
      } else {
        int j = node - n;
        for (int k : col_cells[std::size_t(j)]) {
          int i = basis[std::size_t(k)].i;
          if (!u_set[std::size_t(i)]) {
            u[std::size_t(i)] = C(i, j) - v[std::size_t(j)];
            u_set[std::size_t(i)] = 1;
            stack.push_back(i);
          }
        }
      }
    }
    for (int i = 0; i < n; ++i)
      if (!u_set[std::size_t(i)]) fail_num("exact_ot: basis lost connectivity");
    for (int j = 0; j < m; ++j)
      if (!v_set[std::size_t(j)]) fail_num("exact_ot: basis lost connectivity");

    // Entering cell: lowest flattened index with negative reduced cost.
    int enter_i = -1, enter_j = -1;
    for (int i = 0; i < n && enter_i < 0; ++i)
      for (int j = 0; j < m; ++j) {
        if (cell_pos[std::size_t(i * m + j)] != kAbsent) continue;
        if (C(i, j) - u[std::size_t(i)] - v[std::size_t(j)] < -pivot_tol) {
          enter_i = i;
          enter_j = j;
          break;
        }
      }
    if (enter_i < 0) break;  // optimal

    if (++pivots > max_pivots) fail_num("exact_ot: pivot budget exceeded");

    // Unique tree path from row enter_i to column enter_j.
    std::vector<int> parent_edge(std::size_t(n + m), -1);
    std::vector<int> parent_node(std::size_t(n + m), -1);
    std::vector<char> seen(std::size_t(n + m), 0);
    std::vector<int> queue{enter_i};
    seen[std::size_t(enter_i)] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int node = queue[qi];
      if (node == n + enter_j) break;
      auto& cells = node < n ? row_cells[std::size_t(node)] : col_cells[std::size_t(node - n)];
      for (int k : cells) {
        int other = node < n ? n + basis[std::size_t(k)].j : basis[std::size_t(k)].i;
        if (!seen[std::size_t(other)]) {
          seen[std::size_t(other)] = 1;
          parent_edge[std::size_t(other)] = k;
          parent_node[std::size_t(other)] = node;
          queue.push_back(other);
        }
      }
    }
    if (!seen[std::size_t(n + enter_j)]) fail_num("exact_ot: no cycle for entering cell");

    // Walk the path backwards; edges alternate -,+,... starting at the
    // column end so the entering (+) cell balances every node.
    std::vector<int> path;
    for (int node = n + enter_j; node != enter_i; node = parent_node[std::size_t(node)])
      path.push_back(parent_edge[std::size_t(node)]);

    double theta = std::numeric_limits<double>::infinity();
    int leave_k = -1;
    for (std::size_t t = 0; t < path.size(); t += 2) {  // minus-edges
      const BasicCell& cell = basis[std::size_t(path[t])];
      int flat = cell.i * m + cell.j;
      if (cell.alloc < theta ||
          (cell.alloc == theta && leave_k >= 0 &&
           flat < basis[std::size_t(leave_k)].i * m + basis[std::size_t(leave_k)].j)) {
        theta = cell.alloc;
        leave_k = path[t];
      }
    }
    if (leave_k < 0) fail_num("exact_ot: empty pivot cycle");

    for (std::size_t t = 0; t < path.size(); ++t) {
      BasicCell& cell = basis[std::size_t(path[t])];
      cell.alloc += (t % 2 == 0) ? -theta : theta;
      if (cell.alloc < 0.0) cell.alloc = 0.0;  // rounding guard
    }

    // Replace the leaving cell by the entering cell in-place.
    BasicCell& slot = basis[std::size_t(leave_k)];
    cell_pos[std::size_t(slot.i * m + slot.j)] = kAbsent;
    slot = {enter_i, enter_j, theta};
    cell_pos[std::size_t(enter_i * m + enter_j)] = leave_k;
  }

  ExactOtResult out;
  out.plan.coupling = Matrix::Zero(n, m);
  for (const BasicCell& cell : basis) out.plan.coupling(cell.i, cell.j) += cell.alloc;
  out.plan.row_marginal = a.weights;
  out.plan.col_marginal = b.weights;
  out.plan.iterations_used = pivots;
  out.plan.converged = true;
  out.cost = (out.plan.coupling.array() * C.array()).sum();
  return out;
}

}  // namespace otml
