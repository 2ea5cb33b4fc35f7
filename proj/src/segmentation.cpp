#include "njcr/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

namespace njcr {

namespace {

void require_connectivity(int connectivity) {
  if (connectivity != 4 && connectivity != 8) throw ConfigError("connectivity must be 4 or 8");
}

// Calls f(p, q) once per unordered pair of spatially adjacent pixels.
template <typename F>
void for_each_adjacent_pair(std::size_t width, std::size_t height, int connectivity, F&& f) {
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t p = r * width + c;
      if (c + 1 < width) f(p, p + 1);
      if (r + 1 < height) {
        f(p, p + width);
        if (connectivity == 8) {
          if (c + 1 < width) f(p, p + width + 1);
          if (c > 0) f(p, p + width - 1);
        }
      }
    }
  }
}

std::vector<bool> membership(std::size_t n, std::span<const std::size_t> part) {
  std::vector<bool> in(n, false);
  for (auto v : part) {
    if (v >= n) throw ConfigError("node index out of range");
    if (in[v]) throw ConfigError("duplicate node in partition");
    in[v] = true;
  }
  return in;
}

void require_proper(const PixelGraph& graph, std::span<const std::size_t> part_a) {
  if (part_a.empty() || part_a.size() >= graph.node_count()) {
    throw ConfigError("partition side must be a non-empty proper subset of the nodes");
  }
}

// Induced subgraph on `nodes` (global ids); local node k corresponds to nodes[k].
PixelGraph induced_subgraph(const PixelGraph& graph, const std::vector<std::size_t>& nodes,
                            const std::vector<std::int64_t>& local_of) {
  std::vector<GraphEdge> edges;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (const auto& [nb, w] : graph.neighbors(nodes[k])) {
      const std::int64_t j = local_of[nb];
      if (j > static_cast<std::int64_t>(k)) edges.push_back({k, static_cast<std::size_t>(j), w});
    }
  }
  return PixelGraph(nodes.size(), std::move(edges));
}

// Connected components of the subset `in` (local ids) of `graph`.
std::vector<std::vector<std::size_t>> components(const PixelGraph& graph, const std::vector<bool>& in) {
  std::vector<bool> seen(graph.node_count(), false);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < graph.node_count(); ++s) {
    if (!in[s] || seen[s]) continue;
    std::vector<std::size_t> comp{s};
    seen[s] = true;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (const auto& [nb, w] : graph.neighbors(comp[head])) {
        if (in[nb] && !seen[nb]) {
          seen[nb] = true;
          comp.push_back(nb);
        }
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

// Splits a connected graph into two connected node sets (local ids).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> bisect(const PixelGraph& g,
                                                                     std::uint64_t seed,
                                                                     const SegmentationOptions& opt) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (n > 2) {
    const Eigen::VectorXd y = fiedler_vector(g, seed, opt.lanczos_steps, opt.dense_limit);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y(static_cast<Eigen::Index>(a)) < y(static_cast<Eigen::Index>(b)); });
  }
  const std::size_t k = n > 2 ? sweep_split(g, order) : 1;

  // comp_id per node: every connected piece of A and B gets an id.
  std::vector<bool> in_a(n, false);
  for (std::size_t i = 0; i < k; ++i) in_a[order[i]] = true;
  std::vector<bool> in_b(n);
  for (std::size_t i = 0; i < n; ++i) in_b[i] = !in_a[i];
  auto comps_a = components(g, in_a);
  auto comps_b = components(g, in_b);
  auto largest = [](const auto& comps) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < comps.size(); ++c) {
      if (comps[c].size() > comps[best].size()) best = c;
    }
    return best;
  };
  std::vector<std::vector<std::size_t>> pieces;
  const std::size_t main_a = largest(comps_a);
  const std::size_t main_b = largest(comps_b);
  pieces.push_back(comps_a[main_a]);
  pieces.push_back(comps_b[main_b]);
  for (std::size_t c = 0; c < comps_a.size(); ++c) if (c != main_a) pieces.push_back(comps_a[c]);
  for (std::size_t c = 0; c < comps_b.size(); ++c) if (c != main_b) pieces.push_back(comps_b[c]);

  std::vector<std::size_t> piece_of(n);
  for (std::size_t p = 0; p < pieces.size(); ++p) for (auto v : pieces[p]) piece_of[v] = p;
  std::vector<bool> alive(pieces.size(), true);

  // Merge fragments, smallest first, into their most associated neighbour piece.
  for (;;) {
    std::size_t frag = pieces.size();
    for (std::size_t p = 2; p < pieces.size(); ++p) {
      if (alive[p] && (frag == pieces.size() || pieces[p].size() < pieces[frag].size())) frag = p;
    }
    if (frag == pieces.size()) break;
    std::vector<double> assoc(pieces.size(), 0.0);
    std::vector<std::size_t> contacts(pieces.size(), 0);
    for (auto v : pieces[frag]) {
      for (const auto& [nb, w] : g.neighbors(v)) {
        const std::size_t q = piece_of[nb];
        if (q == frag) continue;
        assoc[q] += w;
        ++contacts[q];
      }
    }
    std::size_t target = pieces.size();
    for (std::size_t q = 0; q < pieces.size(); ++q) {
      if (!alive[q] || q == frag || contacts[q] == 0) continue;
      if (target == pieces.size() || assoc[q] > assoc[target] ||
          (assoc[q] == assoc[target] && contacts[q] > contacts[target])) {
        target = q;
      }
    }
    if (target == pieces.size()) throw NumericError("segmentation fragment has no neighbour");
    for (auto v : pieces[frag]) piece_of[v] = target;
    pieces[target].insert(pieces[target].end(), pieces[frag].begin(), pieces[frag].end());
    pieces[frag].clear();
    alive[frag] = false;
  }
  return {std::move(pieces[0]), std::move(pieces[1])};
}

}  // namespace

PixelGraph::PixelGraph(std::size_t node_count, std::vector<GraphEdge> edges)
    : node_count_(node_count), edges_(std::move(edges)), degree_(node_count, 0.0) {
  std::vector<std::size_t> count(node_count_, 0);
  for (const auto& e : edges_) {
    if (e.i >= node_count_ || e.j >= node_count_) throw ConfigError("edge endpoint out of range");
    if (e.i == e.j) throw ConfigError("self-loops are not allowed");
    if (!std::isfinite(e.weight) || e.weight < 0.0) throw ConfigError("edge weights must be finite and >= 0");
    ++count[e.i];
    ++count[e.j];
  }
  offsets_.assign(node_count_ + 1, 0);
  for (std::size_t v = 0; v < node_count_; ++v) offsets_[v + 1] = offsets_[v] + count[v];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[fill[e.i]++] = {e.j, e.weight};
    adjacency_[fill[e.j]++] = {e.i, e.weight};
    degree_[e.i] += e.weight;
    degree_[e.j] += e.weight;
  }
  for (std::size_t v = 0; v < node_count_; ++v) {
    auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]);
    auto last = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last, [](const auto& a, const auto& b) { return a.first == b.first; }) != last) {
      throw ConfigError("duplicate edge in graph");
    }
  }
}

double PixelGraph::weight(std::size_t i, std::size_t j) const {
  const auto nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), j,
                             [](const std::pair<std::size_t, double>& a, std::size_t key) { return a.first < key; });
  return (it != nb.end() && it->first == j) ? it->second : 0.0;
}

PixelGraph build_graph(const PixelMatrix& pixels, std::size_t width, std::size_t height,
                       int connectivity, double sigma_g) {
  require_connectivity(connectivity);
  if (!(sigma_g > 0.0) || !std::isfinite(sigma_g)) throw ConfigError("sigma_g must be positive");
  if (static_cast<std::size_t>(pixels.cols()) != width * height) throw ConfigError("pixel matrix size mismatch");
  const double inv = 1.0 / (2.0 * sigma_g * sigma_g);
  std::vector<GraphEdge> edges;
  edges.reserve(width * height * (connectivity == 8 ? 4 : 2));
  for_each_adjacent_pair(width, height, connectivity, [&](std::size_t p, std::size_t q) {
    const double d2 = (pixels.col(static_cast<Eigen::Index>(p)) - pixels.col(static_cast<Eigen::Index>(q))).squaredNorm();
    edges.push_back({p, q, std::exp(-d2 * inv)});
  });
  return PixelGraph(width * height, std::move(edges));
}

PixelGraph build_graph(const HsiCube& cube, int connectivity, double sigma_g) {
  return build_graph(flatten(cube), cube.width(), cube.height(), connectivity, sigma_g);
}

double median_adjacent_distance(const PixelMatrix& pixels, std::size_t width, std::size_t height,
                                int connectivity) {
  require_connectivity(connectivity);
  std::vector<double> d;
  for_each_adjacent_pair(width, height, connectivity, [&](std::size_t p, std::size_t q) {
    const double v = (pixels.col(static_cast<Eigen::Index>(p)) - pixels.col(static_cast<Eigen::Index>(q))).norm();
    if (v > 0.0) d.push_back(v);
  });
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

double cut_value(const PixelGraph& graph, std::span<const std::size_t> part_a) {
  require_proper(graph, part_a);
  const auto in = membership(graph.node_count(), part_a);
  double cut = 0.0;
  for (const auto& e : graph.edges()) {
    if (in[e.i] != in[e.j]) cut += e.weight;
  }
  return cut;
}

double assoc_value(const PixelGraph& graph, std::span<const std::size_t> part_a) {
  membership(graph.node_count(), part_a);
  double s = 0.0;
  for (auto v : part_a) s += graph.degree(v);
  return s;
}

double ncut_value(const PixelGraph& graph, std::span<const std::size_t> part_a) {
  const double cut = cut_value(graph, part_a);
  const double assoc_a = assoc_value(graph, part_a);
  double total = 0.0;
  for (double d : graph.degrees()) total += d;
  const double assoc_b = total - assoc_a;
  if (assoc_a <= 0.0 || assoc_b <= 0.0) return std::numeric_limits<double>::infinity();
  return cut / assoc_a + cut / assoc_b;
}

PixelMatrix pca_reduce(const PixelMatrix& pixels, std::size_t components) {
  const Eigen::Index l = pixels.rows();
  const Eigen::VectorXd mean = pixels.rowwise().mean();
  PixelMatrix centered = pixels.colwise() - mean;
  if (components == 0 || static_cast<Eigen::Index>(components) >= l) return centered;
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(std::max<Eigen::Index>(pixels.cols() - 1, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues ascend; the last columns span the leading components.
  const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(components));
  return basis.transpose() * centered;
}

Eigen::VectorXd fiedler_vector(const PixelGraph& graph, std::uint64_t seed, std::size_t lanczos_steps,
                               std::size_t dense_limit) {
  const std::size_t n = graph.node_count();
  if (n < 2) throw ConfigError("fiedler_vector needs at least two nodes");
  const auto ni = static_cast<Eigen::Index>(n);
  double mean_degree = 0.0;
  for (double d : graph.degrees()) mean_degree += d;
  mean_degree /= static_cast<double>(n);
  // Isolated nodes get a tiny degree so D^{-1/2} stays finite.
  const double floor = 1e-12 * std::max(mean_degree, 1e-300) + 1e-300;
  Eigen::VectorXd d(ni);
  for (std::size_t v = 0; v < n; ++v) d(static_cast<Eigen::Index>(v)) = graph.degree(v) + floor;
  const Eigen::VectorXd inv_sqrt = d.cwiseSqrt().cwiseInverse();

  // M = D^{-1/2} W D^{-1/2}; its second largest eigenvector z gives y = D^{-1/2} z.
  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(ni);
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const auto& [nb, w] : graph.neighbors(v)) acc += w * inv_sqrt(static_cast<Eigen::Index>(nb)) * x(static_cast<Eigen::Index>(nb));
      out(static_cast<Eigen::Index>(v)) = acc * inv_sqrt(static_cast<Eigen::Index>(v));
    }
    return out;
  };
  const Eigen::VectorXd top = d.cwiseSqrt().normalized();

  Eigen::VectorXd z;
  if (n <= dense_limit) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ni, ni);
    for (const auto& e : graph.edges()) {
      const auto i = static_cast<Eigen::Index>(e.i);
      const auto j = static_cast<Eigen::Index>(e.j);
      const double v = e.weight * inv_sqrt(i) * inv_sqrt(j);
      M(i, j) = v;
      M(j, i) = v;
    }
    // Deflate the trivial eigenvector so the largest remaining one is wanted.
    M -= 2.0 * top * top.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    z = eig.eigenvectors().col(ni - 1);
  } else {
    const std::size_t m = std::min<std::size_t>(lanczos_steps, n - 1);
    Eigen::MatrixXd Q(ni, static_cast<Eigen::Index>(m + 1));
    std::vector<double> alpha, beta;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd q(ni);
    for (Eigen::Index i = 0; i < ni; ++i) q(i) = gauss(rng);
    q -= top * top.dot(q);
    q.normalize();
    Q.col(0) = q;
    std::size_t steps = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      Eigen::VectorXd w = apply(Q.col(jj));
      w -= top * top.dot(w);
      const double a = Q.col(jj).dot(w);
      alpha.push_back(a);
      ++steps;
      // Full reorthogonalization, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        const auto basis = Q.leftCols(jj + 1);
        w -= basis * (basis.transpose() * w);
        w -= top * top.dot(w);
      }
      const double b = w.norm();
      if (b < 1e-12 || j + 1 == m) break;
      beta.push_back(b);
      Q.col(jj + 1) = w / b;
    }
    const auto k = static_cast<Eigen::Index>(steps);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      T(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) {
        T(i, i + 1) = beta[static_cast<std::size_t>(i)];
        T(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
    z = Q.leftCols(k) * eig.eigenvectors().col(k - 1);
  }
  return z.cwiseProduct(inv_sqrt);
}

std::size_t sweep_split(const PixelGraph& graph, std::span<const std::size_t> order) {
  const std::size_t n = graph.node_count();
  if (order.size() != n || n < 2) throw ConfigError("sweep order must cover every node of a >= 2 node graph");
  double total = 0.0;
  for (double d : graph.degrees()) total += d;
  std::vector<bool> in_a(n, false);
  double cut = 0.0;
  double assoc_a = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t v = order[k - 1];
    for (const auto& [nb, w] : graph.neighbors(v)) cut += in_a[nb] ? -w : w;
    in_a[v] = true;
    assoc_a += graph.degree(v);
    const double assoc_b = total - assoc_a;
    if (assoc_a <= 0.0 || assoc_b <= 0.0) continue;
    const double value = std::max(cut, 0.0) / assoc_a + std::max(cut, 0.0) / assoc_b;
    if (value < best) {
      best = value;
      best_k = k;
    }
  }
  return best_k;
}

SuperpixelMap segment(const HsiCube& cube, const SegmentationOptions& options) {
  const std::size_t n = cube.pixel_count();
  const std::size_t s = options.target_count;
  if (s < 2 || s > n) throw ConfigError("superpixel count must lie in [2, pixel count]");
  require_connectivity(options.connectivity);
  if (s == n) {
    std::vector<std::uint32_t> labels(n);
    std::iota(labels.begin(), labels.end(), 0u);
    return SuperpixelMap(cube.width(), cube.height(), std::move(labels));
  }

  const PixelMatrix reduced = pca_reduce(flatten(cube), options.pca_components);
  double sigma = options.sigma_g;
  if (!(sigma > 0.0)) sigma = median_adjacent_distance(reduced, cube.width(), cube.height(), options.connectivity);
  const PixelGraph graph = build_graph(reduced, cube.width(), cube.height(), options.connectivity, sigma);

  std::vector<std::uint32_t> labels(n, 0);
  std::vector<std::vector<std::size_t>> members(1);
  members[0].resize(n);
  std::iota(members[0].begin(), members[0].end(), 0);

  // Largest segment first; ties go to the lower label.
  auto cmp = [&](std::uint32_t a, std::uint32_t b) {
    if (members[a].size() != members[b].size()) return members[a].size() < members[b].size();
    return a > b;
  };
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, decltype(cmp)> queue(cmp);
  queue.push(0);
  std::vector<std::int64_t> local_of(n, -1);
  std::uint64_t split_index = 0;
  while (members.size() < s && !queue.empty()) {
    const std::uint32_t label = queue.top();
    queue.pop();
    auto& nodes = members[label];
    if (nodes.size() < 2) continue;
    for (std::size_t k = 0; k < nodes.size(); ++k) local_of[nodes[k]] = static_cast<std::int64_t>(k);
    const PixelGraph sub = induced_subgraph(graph, nodes, local_of);
    auto [part_a, part_b] = bisect(sub, options.seed * 0x9E3779B97F4A7C15ull + split_index++, options);
    for (auto v : nodes) local_of[v] = -1;

    std::vector<std::size_t> a(part_a.size()), b(part_b.size());
    for (std::size_t k = 0; k < part_a.size(); ++k) a[k] = nodes[part_a[k]];
    for (std::size_t k = 0; k < part_b.size(); ++k) b[k] = nodes[part_b[k]];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // The part holding the lowest pixel index keeps the parent label.
    if (b.front() < a.front()) std::swap(a, b);
    const auto fresh = static_cast<std::uint32_t>(members.size());
    for (auto v : b) labels[v] = fresh;
    members[label] = std::move(a);
    members.push_back(std::move(b));
    queue.push(label);
    queue.push(fresh);
  }

  // Relabel in raster order of first appearance.
  std::vector<std::int64_t> remap(members.size(), -1);
  std::uint32_t next = 0;
  for (auto& l : labels) {
    if (remap[l] < 0) remap[l] = next++;
    l = static_cast<std::uint32_t>(remap[l]);
  }
  return SuperpixelMap(cube.width(), cube.height(), std::move(labels));
}

bool labels_connected(const SuperpixelMap& map, int connectivity) {
  require_connectivity(connectivity);
  const std::size_t w = map.width();
  const std::size_t h = map.height();
  std::vector<std::vector<std::size_t>> nbrs(w * h);
  for_each_adjacent_pair(w, h, connectivity, [&](std::size_t p, std::size_t q) {
    if (map[p] == map[q]) {
      nbrs[p].push_back(q);
      nbrs[q].push_back(p);
    }
  });
  std::vector<bool> seen(w * h, false);
  std::vector<bool> label_seen(map.label_count(), false);
  for (std::size_t s = 0; s < w * h; ++s) {
    if (seen[s]) continue;
    if (label_seen[map[s]]) return false;
    label_seen[map[s]] = true;
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto q : nbrs[v]) {
        if (!seen[q]) {
          seen[q] = true;
          stack.push_back(q);
        }
      }
    }
  }
  return true;
}

std::string superpixel_svg(const SuperpixelMap& map, double scale) {
  const std::size_t w = map.width();
  const std::size_t h = map.height();
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * scale << "\" height=\"" << h * scale
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#f4f4f4\"/>\n";
  out << "<path stroke=\"#c0392b\" stroke-width=\"0.15\" fill=\"none\" d=\"";
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const auto l = map[r * w + c];
      if (c + 1 < w && map[r * w + c + 1] != l) out << 'M' << c + 1 << ' ' << r << "v1";
      if (r + 1 < h && map[(r + 1) * w + c] != l) out << 'M' << c << ' ' << r + 1 << "h1";
    }
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

}  // namespace njcr
