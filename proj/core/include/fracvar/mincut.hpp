#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace fracvar {

// Exact minimization of a binary energy with submodular pairwise terms via s-t min-cut
// (Boykov-Kolmogorov max-flow). Variable value 0 is the source side.
class BinaryGraphCut {
 public:
  explicit BinaryGraphCut(std::size_t variables);
  ~BinaryGraphCut();
  BinaryGraphCut(const BinaryGraphCut&) = delete;
  BinaryGraphCut& operator=(const BinaryGraphCut&) = delete;

  std::size_t size() const { return n_; }
  // Cost e0 when x_p = 0 and e1 when x_p = 1.
  void add_unary(std::size_t p, double e0, double e1);
  // E(x_p, x_q) with e00 + e11 <= e01 + e10 (throws otherwise, up to round-off).
  void add_pairwise(std::size_t p, std::size_t q, double e00, double e01, double e10, double e11);
  void add_constant(double c) { constant_ += c; }

  // Returns the minimum energy; labels are available afterwards.
  double solve();
  int label(std::size_t p) const { return labels_[p]; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::size_t n_;
  double constant_ = 0.0;
  std::vector<double> source_cap_, sink_cap_;
  struct Edge {
    std::size_t p, q;
    double pq, qp;
  };
  std::vector<Edge> edges_;
  std::vector<int> labels_;
};

}  // namespace fracvar
