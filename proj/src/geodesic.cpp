#include "specdesc/geodesic.hpp"

#include <limits>
#include <queue>

namespace specdesc {

namespace {

void dijkstra(const EdgeGraph& g, std::span<const Index> sources, Vector& dist,
              Scalar limit = std::numeric_limits<Scalar>::infinity()) {
  using Entry = std::pair<Scalar, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist.setConstant(g.num_vertices(), std::numeric_limits<Scalar>::infinity());
  for (Index s : sources) {
    dist[s] = 0;
    queue.emplace(0, s);
  }
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (auto e = g.offsets[static_cast<std::size_t>(u)]; e < g.offsets[static_cast<std::size_t>(u) + 1]; ++e) {
      const auto v = g.neighbors[static_cast<std::size_t>(e)];
      const Scalar nd = d + g.lengths[static_cast<std::size_t>(e)];
      if (nd < dist[v] && nd < limit) {
        dist[v] = nd;
        queue.emplace(nd, v);
      }
    }
  }
}

void check_vertex(const TriangleMesh& mesh, Index v) {
  if (v < 0 || v >= mesh.num_vertices()) throw UsageError("vertex index " + std::to_string(v) + " out of range");
}

// Index of the largest entry; first index wins ties.
Index argmax_first(const Vector& values) {
  Index best = 0;
  for (Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

GeodesicField geodesic_distances(const TriangleMesh& mesh, Index source) {
  check_vertex(mesh, source);
  GeodesicField field{source, {}};
  const Index sources[] = {source};
  dijkstra(mesh.edge_graph(), sources, field.distances);
  return field;
}

Vector geodesic_distances(const TriangleMesh& mesh, std::span<const Index> sources) {
  if (sources.empty()) throw UsageError("geodesic_distances needs at least one source");
  for (Index s : sources) check_vertex(mesh, s);
  Vector dist;
  dijkstra(mesh.edge_graph(), sources, dist);
  return dist;
}

GeodesicBall geodesic_ball(const TriangleMesh& mesh, std::span<const Index> sources, Scalar radius) {
  if (sources.empty()) throw UsageError("geodesic_ball needs at least one source");
  for (Index s : sources) check_vertex(mesh, s);
  Vector dist;
  dijkstra(mesh.edge_graph(), sources, dist, radius);
  GeodesicBall ball;
  for (Index v = 0; v < dist.size(); ++v) {
    if (dist[v] < radius) {
      ball.vertices.push_back(v);
      ball.distances.push_back(dist[v]);
    }
  }
  return ball;
}

std::vector<Index> farthest_point_sample(const TriangleMesh& mesh, Index k) {
  if (k < 1 || k > mesh.num_vertices()) throw UsageError("farthest_point_sample: k must lie in [1, V]");
  std::vector<Index> chosen{0};
  Vector min_dist = geodesic_distances(mesh, 0).distances;
  min_dist[0] = -1;
  while (static_cast<Index>(chosen.size()) < k) {
    const Index next = argmax_first(min_dist);
    chosen.push_back(next);
    min_dist = min_dist.cwiseMin(geodesic_distances(mesh, next).distances);
    // Chosen points are pinned below every candidate so duplicates cannot be
    // picked when the remaining vertices coincide with the set.
    for (Index c : chosen) min_dist[c] = -1;
  }
  return chosen;
}

std::vector<Index> farthest_point_sample(const Matrix& field, Index k) {
  const Index n = field.rows();
  if (k < 1 || k > n) throw UsageError("farthest_point_sample: k must lie in [1, V]");
  std::vector<Index> chosen{0};
  Vector min_dist = (field.rowwise() - field.row(0)).rowwise().norm();
  min_dist[0] = -1;
  while (static_cast<Index>(chosen.size()) < k) {
    const Index next = argmax_first(min_dist);
    chosen.push_back(next);
    min_dist = min_dist.cwiseMin((field.rowwise() - field.row(next)).rowwise().norm());
    for (Index c : chosen) min_dist[c] = -1;
  }
  return chosen;
}

Scalar intrinsic_diameter(const TriangleMesh& mesh, Index samples) {
  if (samples < 2) throw UsageError("intrinsic_diameter needs at least two samples");
  samples = std::min(samples, mesh.num_vertices());
  const auto points = farthest_point_sample(mesh, samples);
  Scalar diameter = 0;
  for (Index p : points) {
    const auto d = geodesic_distances(mesh, p).distances;
    for (Index q : points) diameter = std::max(diameter, d[q]);
  }
  return diameter;
}

}  // namespace specdesc
