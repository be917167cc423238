#include "fracvar/mincut.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boykov_kolmogorov_max_flow.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracvar {

namespace {

using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
using Graph = boost::adjacency_list<
    boost::vecS, boost::vecS, boost::directedS,
    boost::property<boost::vertex_color_t, boost::default_color_type,
                    boost::property<boost::vertex_distance_t, long,
                                    boost::property<boost::vertex_predecessor_t, Traits::edge_descriptor>>>,
    boost::property<boost::edge_capacity_t, double,
                    boost::property<boost::edge_residual_capacity_t, double,
                                    boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;

}  // namespace

BinaryGraphCut::BinaryGraphCut(std::size_t variables)
    : n_(variables), source_cap_(variables, 0.0), sink_cap_(variables, 0.0), labels_(variables, 0) {}

BinaryGraphCut::~BinaryGraphCut() = default;

void BinaryGraphCut::add_unary(std::size_t p, double e0, double e1) {
  // x_p = 1 cuts source->p, x_p = 0 cuts p->sink.
  const double m = std::min(e0, e1);
  constant_ += m;
  source_cap_[p] += e1 - m;
  sink_cap_[p] += e0 - m;
}

void BinaryGraphCut::add_pairwise(std::size_t p, std::size_t q, double e00, double e01, double e10, double e11) {
  const double lambda = e01 + e10 - e00 - e11;
  if (lambda < -1e-9 * (std::abs(e01) + std::abs(e10) + 1.0)) throw std::invalid_argument("pairwise term is not submodular");
  // E = e00 + (e10 - e00) x_p + (e11 - e10) x_q + lambda (1 - x_p) x_q
  constant_ += e00;
  add_unary(p, 0.0, e10 - e00);
  add_unary(q, 0.0, e11 - e10);
  if (lambda > 0.0) edges_.push_back({p, q, lambda, 0.0});
}

double BinaryGraphCut::solve() {
  Graph g(n_ + 2);
  const std::size_t s = n_, t = n_ + 1;
  auto cap = boost::get(boost::edge_capacity, g);
  auto rev = boost::get(boost::edge_reverse, g);
  auto add = [&](std::size_t a, std::size_t b, double ab, double ba) {
    auto e1 = boost::add_edge(a, b, g).first;
    auto e2 = boost::add_edge(b, a, g).first;
    cap[e1] = ab;
    cap[e2] = ba;
    rev[e1] = e2;
    rev[e2] = e1;
  };
  for (std::size_t p = 0; p < n_; ++p) {
    if (source_cap_[p] > 0.0) add(s, p, source_cap_[p], 0.0);
    if (sink_cap_[p] > 0.0) add(p, t, sink_cap_[p], 0.0);
  }
  for (const auto& e : edges_) add(e.p, e.q, e.pq, e.qp);
  const double flow = boost::boykov_kolmogorov_max_flow(g, s, t);
  auto color = boost::get(boost::vertex_color, g);
  // Vertices not reachable from the source in the residual graph go to the sink side.
  for (std::size_t p = 0; p < n_; ++p) labels_[p] = color[p] == boost::black_color ? 0 : 1;
  return flow + constant_;
}

}  // namespace fracvar
