#include "bhavnet/pair_graph.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "bhavnet/error.hpp"
#include "bhavnet/model.hpp"
#include "bhavnet/union_find.hpp"

namespace bhavnet {
namespace {

Tensor midpoint(const Tensor& a, const Tensor& b) {
  Tensor m = a;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
  return m;
}

bool share_token(const LabeledPair& a, const LabeledPair& b) {
  return a.w1 == b.w1 || a.w1 == b.w2 || a.w2 == b.w1 || a.w2 == b.w2;
}

}  // namespace

std::vector<std::vector<std::pair<std::size_t, double>>> PairGraph::adjacency() const {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(node_count);
  for (const Edge& e : edges) {
    if (e.src >= node_count || e.dst >= node_count) {
      throw GraphError("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) + " outside " +
                       std::to_string(node_count) + " nodes");
    }
    adj[e.src].emplace_back(e.dst, e.weight);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

NodeFingerprints fingerprints(std::span<const PairForward> forwards) {
  NodeFingerprints fp;
  const bool dual = std::all_of(forwards.begin(), forwards.end(), [](const PairForward& f) { return f.a1 && f.a2; });
  for (const PairForward& f : forwards) {
    fp.syn.push_back(midpoint(f.s1, f.s2));
    if (dual) fp.ant.push_back(midpoint(*f.a1, *f.a2));
  }
  return fp;
}

PairGraph build_graph(std::span<const LabeledPair> batch, std::span<const PairForward> forwards, double tau,
                      double trans_weight) {
  if (batch.size() != forwards.size()) {
    throw InvalidInput("build_graph: " + std::to_string(batch.size()) + " pairs but " +
                       std::to_string(forwards.size()) + " forwards");
  }
  return build_graph(batch, fingerprints(forwards), tau, trans_weight);
}

PairGraph build_graph(std::span<const LabeledPair> batch, const NodeFingerprints& prints, double tau,
                      double trans_weight) {
  const std::size_t n = batch.size();
  if (prints.syn.size() != n || (!prints.ant.empty() && prints.ant.size() != n)) {
    throw InvalidInput("build_graph: fingerprints do not align with the batch");
  }
  if (!(trans_weight > 0.0 && trans_weight <= 1.0)) throw InvalidInput("build_graph: trans_weight must lie in (0, 1]");

  // weight[i*n+j] > 0 marks an edge; rule[] remembers which rule created it.
  std::vector<double> weight(n * n, 0.0);
  std::vector<EdgeRule> rule(n * n, EdgeRule::shared_word);
  auto connect = [&](std::size_t i, std::size_t j, double w, EdgeRule r) {
    for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
      double& slot = weight[a * n + b];
      if (w > slot) {
        slot = w;
        rule[a * n + b] = r;
      }
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (share_token(batch[i], batch[j])) {
        connect(i, j, 1.0, EdgeRule::shared_word);
        continue;
      }
      bool similar = cosine(prints.syn[i].data(), prints.syn[j].data()) > tau;
      if (!similar && !prints.ant.empty()) similar = cosine(prints.ant[i].data(), prints.ant[j].data()) > tau;
      if (similar) connect(i, j, 1.0, EdgeRule::similarity);
    }
  }

  // Single-hop closure over the rule 1/2 snapshot only.
  const std::vector<double> direct = weight;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      if (direct[i * n + k] > 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && j != k && direct[i * n + j] > 0.0 && direct[j * n + k] > 0.0) {
          connect(i, k, trans_weight, EdgeRule::transitive);
          break;
        }
      }
    }
  }

  PairGraph g;
  g.node_count = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (weight[i * n + j] > 0.0) g.edges.push_back({i, j, weight[i * n + j], rule[i * n + j]});
  return g;
}

GraphStats graph_stats(const PairGraph& g) {
  GraphStats s;
  s.nodes = g.node_count;
  std::vector<std::size_t> degree(g.node_count, 0);
  DisjointSets sets(g.node_count);
  for (const Edge& e : g.edges) {
    if (e.src >= g.node_count || e.dst >= g.node_count) throw GraphError("graph_stats: dangling edge");
    ++degree[e.src];
    if (e.src < e.dst) {
      ++s.edges_by_rule[static_cast<std::size_t>(e.rule)];
      sets.unite(e.src, e.dst);
    }
  }
  for (std::size_t d : degree) ++s.degree_histogram[d];
  s.components = sets.set_count();
  return s;
}

std::string format_graph_dump(const PairGraph& g) {
  std::ostringstream out;
  char buf[32];
  for (const Edge& e : g.edges) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.weight);
    out << e.src << ' ' << e.dst << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << ' '
        << static_cast<int>(e.rule) << '\n';
  }
  const GraphStats s = graph_stats(g);
  out << "# nodes " << s.nodes << '\n';
  out << "# edges " << s.edge_count() << '\n';
  out << "# edges_rule1 " << s.edges_by_rule[1] << '\n';
  out << "# edges_rule2 " << s.edges_by_rule[2] << '\n';
  out << "# edges_rule3 " << s.edges_by_rule[3] << '\n';
  out << "# components " << s.components << '\n';
  out << "# degrees";
  for (const auto& [deg, count] : s.degree_histogram) out << ' ' << deg << ':' << count;
  out << '\n';
  return out.str();
}

}  // namespace bhavnet
