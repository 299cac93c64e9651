#include "specdesc/mesh.hpp"

#include "specdesc/io.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace specdesc {

namespace {

std::uint64_t edge_key(std::int64_t a, std::int64_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

struct DisjointSets {
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<Index> parent;
};

Scalar triangle_area(const VertexMatrix& v, std::int32_t a, std::int32_t b, std::int32_t c) {
  const Vector3 e1 = (v.row(b) - v.row(a)).transpose();
  const Vector3 e2 = (v.row(c) - v.row(a)).transpose();
  return 0.5 * e1.cross(e2).norm();
}

}  // namespace

TriangleMesh::TriangleMesh(VertexMatrix vertices, FaceMatrix faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const Index nv = vertices_.rows();
  const Index nf = faces_.rows();
  if (nv == 0 || nf == 0) throw ValidationError("mesh has no faces", 0);

  for (Index v = 0; v < nv; ++v) {
    if (!vertices_.row(v).allFinite()) throw ValidationError("non-finite vertex coordinate", v);
  }

  Scalar edge_sum = 0;
  for (Index f = 0; f < nf; ++f) {
    const auto a = faces_(f, 0), b = faces_(f, 1), c = faces_(f, 2);
    for (auto i : {a, b, c}) {
      if (i < 0 || i >= nv) throw ValidationError("face index out of range", f);
    }
    if (a == b || b == c || a == c) throw ValidationError("face repeats a vertex", f);
    edge_sum += (vertices_.row(a) - vertices_.row(b)).norm() + (vertices_.row(b) - vertices_.row(c)).norm() +
                (vertices_.row(c) - vertices_.row(a)).norm();
  }
  const Scalar mean_edge = edge_sum / static_cast<Scalar>(3 * nf);
  const Scalar area_tol = 1e-12 * mean_edge * mean_edge;
  for (Index f = 0; f < nf; ++f) {
    if (triangle_area(vertices_, faces_(f, 0), faces_(f, 1), faces_(f, 2)) <= area_tol) {
      throw ValidationError("degenerate face", f);
    }
  }

  // (edge key, face) pairs sorted by key give per-edge face counts.
  std::vector<std::pair<std::uint64_t, Index>> half_edges;
  half_edges.reserve(static_cast<std::size_t>(3 * nf));
  for (Index f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      half_edges.emplace_back(edge_key(faces_(f, k), faces_(f, (k + 1) % 3)), f);
    }
  }
  std::sort(half_edges.begin(), half_edges.end());

  boundary_.assign(static_cast<std::size_t>(nv), false);
  std::vector<std::pair<Index, Index>> edges;
  for (std::size_t i = 0; i < half_edges.size();) {
    std::size_t j = i;
    while (j < half_edges.size() && half_edges[j].first == half_edges[i].first) ++j;
    const auto count = j - i;
    if (count > 2) throw ValidationError("non-manifold edge", half_edges[i + 2].second);
    const auto a = static_cast<Index>(half_edges[i].first >> 32);
    const auto b = static_cast<Index>(half_edges[i].first & 0xffffffffULL);
    edges.emplace_back(a, b);
    if (count == 1) {
      boundary_[static_cast<std::size_t>(a)] = true;
      boundary_[static_cast<std::size_t>(b)] = true;
    }
    i = j;
  }

  std::vector<bool> referenced(static_cast<std::size_t>(nv), false);
  DisjointSets sets(nv);
  for (const auto& [a, b] : edges) {
    sets.unite(a, b);
    referenced[static_cast<std::size_t>(a)] = referenced[static_cast<std::size_t>(b)] = true;
  }
  for (Index v = 0; v < nv; ++v) {
    if (!referenced[static_cast<std::size_t>(v)]) throw ValidationError("vertex not referenced by any face", v);
    if (sets.find(v) != 0) throw ValidationError("mesh has more than one connected component", v);
  }

  std::vector<Index> degree(static_cast<std::size_t>(nv), 0);
  for (const auto& [a, b] : edges) {
    ++degree[static_cast<std::size_t>(a)];
    ++degree[static_cast<std::size_t>(b)];
  }
  graph_.offsets.assign(static_cast<std::size_t>(nv) + 1, 0);
  for (Index v = 0; v < nv; ++v) {
    graph_.offsets[static_cast<std::size_t>(v) + 1] = graph_.offsets[static_cast<std::size_t>(v)] + degree[static_cast<std::size_t>(v)];
  }
  graph_.neighbors.resize(static_cast<std::size_t>(graph_.offsets.back()));
  graph_.lengths.resize(graph_.neighbors.size());
  std::vector<Index> fill(graph_.offsets.begin(), graph_.offsets.end() - 1);
  // Edges are sorted by (min, max), so each adjacency list ends up sorted.
  std::vector<std::pair<Index, Index>> directed;
  directed.reserve(2 * edges.size());
  for (const auto& [a, b] : edges) {
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  for (const auto& [a, b] : directed) {
    const auto slot = static_cast<std::size_t>(fill[static_cast<std::size_t>(a)]++);
    graph_.neighbors[slot] = b;
    graph_.lengths[slot] = (vertices_.row(a) - vertices_.row(b)).norm();
  }
}

bool TriangleMesh::has_boundary() const {
  return std::any_of(boundary_.begin(), boundary_.end(), [](bool b) { return b; });
}

Vector TriangleMesh::face_areas() const {
  Vector areas(num_faces());
  for (Index f = 0; f < num_faces(); ++f) {
    areas[f] = triangle_area(vertices_, faces_(f, 0), faces_(f, 1), faces_(f, 2));
  }
  return areas;
}

Scalar TriangleMesh::area() const { return face_areas().sum(); }

Scalar TriangleMesh::mean_edge_length() const {
  const auto& l = graph_.lengths;
  return std::accumulate(l.begin(), l.end(), Scalar{0}) / static_cast<Scalar>(l.size());
}

TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation, const Vector3& translation) {
  VertexMatrix v = (mesh.vertices() * rotation.transpose()).rowwise() + translation.transpose();
  return TriangleMesh(std::move(v), mesh.faces());
}

TriangleMesh scaled(const TriangleMesh& mesh, Scalar factor) {
  return TriangleMesh(mesh.vertices() * factor, mesh.faces());
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class LineCursor {
 public:
  explicit LineCursor(std::string_view text) : text_(text) {}

  // Next line with comments stripped; false at end of input.
  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
      while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
      if (!line.empty()) return true;
    }
    return false;
  }
  std::int64_t line_number() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::int64_t line_no_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

template <typename T>
T parse_number(std::string_view token, std::int64_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError("invalid number '" + std::string(token) + "'", line);
  }
  return value;
}

}  // namespace

TriangleMesh parse_off(std::string_view text) {
  LineCursor cursor(text);
  std::string_view line;
  if (!cursor.next(line)) throw ParseError("empty OFF file", 0);
  auto tokens = split_ws(line);
  // COFF carries per-vertex colours after the coordinates; they are ignored.
  if (tokens.empty() || (tokens[0] != "OFF" && tokens[0] != "COFF")) {
    throw ParseError("missing OFF header", cursor.line_number());
  }
  tokens.erase(tokens.begin());
  if (tokens.empty()) {
    if (!cursor.next(line)) throw ParseError("missing counts line", cursor.line_number());
    tokens = split_ws(line);
  }
  if (tokens.size() < 2) throw ParseError("counts line needs V F E", cursor.line_number());
  const auto nv = parse_number<std::int64_t>(tokens[0], cursor.line_number());
  const auto nf = parse_number<std::int64_t>(tokens[1], cursor.line_number());
  if (nv <= 0 || nf <= 0) throw ParseError("non-positive element counts", cursor.line_number());

  VertexMatrix vertices(nv, 3);
  for (std::int64_t v = 0; v < nv; ++v) {
    if (!cursor.next(line)) throw ParseError("unexpected end of file in vertex list", cursor.line_number());
    tokens = split_ws(line);
    if (tokens.size() < 3) throw ParseError("vertex line needs three coordinates", cursor.line_number());
    for (int k = 0; k < 3; ++k) vertices(v, k) = parse_number<double>(tokens[static_cast<std::size_t>(k)], cursor.line_number());
  }
  FaceMatrix faces(nf, 3);
  for (std::int64_t f = 0; f < nf; ++f) {
    if (!cursor.next(line)) throw ParseError("unexpected end of file in face list", cursor.line_number());
    tokens = split_ws(line);
    if (tokens.size() < 4) throw ParseError("face line needs '3 i j k'", cursor.line_number());
    if (parse_number<int>(tokens[0], cursor.line_number()) != 3) {
      throw ParseError("only triangular faces are supported", cursor.line_number());
    }
    for (int k = 0; k < 3; ++k) {
      const auto idx = parse_number<std::int64_t>(tokens[static_cast<std::size_t>(k) + 1], cursor.line_number());
      if (idx < 0 || idx >= nv) throw ParseError("face index out of range", cursor.line_number());
      faces(f, k) = static_cast<std::int32_t>(idx);
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh parse_obj(std::string_view text) {
  LineCursor cursor(text);
  std::string_view line;
  std::vector<Vector3> vertices;
  std::vector<std::array<std::int32_t, 3>> faces;
  while (cursor.next(line)) {
    const auto tokens = split_ws(line);
    if (tokens[0] == "v") {
      if (tokens.size() < 4) throw ParseError("vertex statement needs three coordinates", cursor.line_number());
      vertices.emplace_back(parse_number<double>(tokens[1], cursor.line_number()),
                            parse_number<double>(tokens[2], cursor.line_number()),
                            parse_number<double>(tokens[3], cursor.line_number()));
    } else if (tokens[0] == "f") {
      if (tokens.size() != 4) throw ParseError("only triangular faces are supported", cursor.line_number());
      std::array<std::int32_t, 3> face{};
      for (int k = 0; k < 3; ++k) {
        auto tok = tokens[static_cast<std::size_t>(k) + 1];
        tok = tok.substr(0, tok.find('/'));
        auto idx = parse_number<std::int64_t>(tok, cursor.line_number());
        if (idx == 0) throw ParseError("OBJ indices are 1-based; found 0", cursor.line_number());
        // Negative indices count back from the most recent vertex.
        idx = idx > 0 ? idx - 1 : static_cast<std::int64_t>(vertices.size()) + idx;
        if (idx < 0 || idx >= static_cast<std::int64_t>(vertices.size())) {
          throw ParseError("face references an undefined vertex", cursor.line_number());
        }
        face[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(idx);
      }
      faces.push_back(face);
    }
  }
  if (vertices.empty() || faces.empty()) throw ParseError("OBJ file has no triangles", cursor.line_number());
  VertexMatrix v(static_cast<Index>(vertices.size()), 3);
  for (std::size_t i = 0; i < vertices.size(); ++i) v.row(static_cast<Index>(i)) = vertices[i].transpose();
  FaceMatrix f(static_cast<Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (int k = 0; k < 3; ++k) f(static_cast<Index>(i), k) = faces[i][static_cast<std::size_t>(k)];
  }
  return TriangleMesh(std::move(v), std::move(f));
}

MeshFormat format_from_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".obj") return MeshFormat::Obj;
  throw UsageError("unknown mesh extension '" + ext + "' for " + path.string());
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  const auto text = io::read_file(path);
  try {
    return format == MeshFormat::Off ? parse_off(text) : parse_obj(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), -1);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what(), e.element());
  }
}

TriangleMesh load_mesh(const std::filesystem::path& path) { return load_mesh(path, format_from_extension(path)); }

std::string to_off(const TriangleMesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.num_vertices()) + " " + std::to_string(mesh.num_faces()) + " 0\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    out += io::format_double(mesh.vertices()(v, 0)) + " " + io::format_double(mesh.vertices()(v, 1)) + " " +
           io::format_double(mesh.vertices()(v, 2)) + "\n";
  }
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    out += "3 " + std::to_string(mesh.faces()(f, 0)) + " " + std::to_string(mesh.faces()(f, 1)) + " " +
           std::to_string(mesh.faces()(f, 2)) + "\n";
  }
  return out;
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  if (format_from_extension(path) == MeshFormat::Obj) {
    std::string out;
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
      out += "v " + io::format_double(mesh.vertices()(v, 0)) + " " + io::format_double(mesh.vertices()(v, 1)) + " " +
             io::format_double(mesh.vertices()(v, 2)) + "\n";
    }
    for (Index f = 0; f < mesh.num_faces(); ++f) {
      out += "f " + std::to_string(mesh.faces()(f, 0) + 1) + " " + std::to_string(mesh.faces()(f, 1) + 1) + " " +
             std::to_string(mesh.faces()(f, 2) + 1) + "\n";
    }
    io::write_file_atomic(path, out);
  } else {
    io::write_file_atomic(path, to_off(mesh));
  }
}

void save_colored_off(const TriangleMesh& mesh, std::span<const std::array<float, 4>> colors,
                      const std::filesystem::path& path) {
  if (static_cast<Index>(colors.size()) != mesh.num_vertices()) {
    throw UsageError("colour count does not match vertex count");
  }
  std::string out = "COFF\n";
  out += std::to_string(mesh.num_vertices()) + " " + std::to_string(mesh.num_faces()) + " 0\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    const auto& c = colors[static_cast<std::size_t>(v)];
    out += io::format_double(mesh.vertices()(v, 0)) + " " + io::format_double(mesh.vertices()(v, 1)) + " " +
           io::format_double(mesh.vertices()(v, 2));
    for (float ch : c) out += " " + io::format_double(static_cast<double>(ch));
    out += "\n";
  }
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    out += "3 " + std::to_string(mesh.faces()(f, 0)) + " " + std::to_string(mesh.faces()(f, 1)) + " " +
           std::to_string(mesh.faces()(f, 2)) + "\n";
  }
  io::write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Correspondences

CorrespondenceMap CorrespondenceMap::identity(Index vertices) {
  CorrespondenceMap map;
  map.target.resize(static_cast<std::size_t>(vertices));
  std::iota(map.target.begin(), map.target.end(), std::int64_t{0});
  return map;
}

void CorrespondenceMap::validate(Index source_vertices, Index target_vertices) const {
  if (size() != source_vertices) {
    throw ValidationError("correspondence size " + std::to_string(size()) + " does not match source vertex count " +
                              std::to_string(source_vertices),
                          size());
  }
  if (has_symmetric() && symmetric.size() != target.size()) {
    throw ValidationError("symmetric map size mismatch", static_cast<std::int64_t>(symmetric.size()));
  }
  auto check = [&](const std::vector<std::int64_t>& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] != kNone && (m[i] < 0 || m[i] >= target_vertices)) {
        throw ValidationError("correspondence target out of range", static_cast<std::int64_t>(i));
      }
    }
  };
  check(target);
  check(symmetric);
}

CorrespondenceMap compose(const CorrespondenceMap& a, const CorrespondenceMap& b) {
  auto apply = [&](const std::vector<std::int64_t>& first) {
    std::vector<std::int64_t> out(first.size(), CorrespondenceMap::kNone);
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (first[i] != CorrespondenceMap::kNone) out[i] = b.target[static_cast<std::size_t>(first[i])];
    }
    return out;
  };
  CorrespondenceMap out;
  out.target = apply(a.target);
  if (a.has_symmetric()) out.symmetric = apply(a.symmetric);
  return out;
}

CorrespondenceMap load_correspondence(const std::filesystem::path& path) {
  const auto text = io::read_file(path);
  LineCursor cursor(text);
  std::string_view line;
  CorrespondenceMap map;
  bool any_symmetric = false;
  while (cursor.next(line)) {
    const auto tokens = split_ws(line);
    if (tokens.size() > 2) throw ParseError(path.string() + ": expected 'target [symmetric]'", cursor.line_number());
    map.target.push_back(parse_number<std::int64_t>(tokens[0], cursor.line_number()));
    if (tokens.size() == 2) {
      any_symmetric = true;
      map.symmetric.resize(map.target.size() - 1, CorrespondenceMap::kNone);
      map.symmetric.push_back(parse_number<std::int64_t>(tokens[1], cursor.line_number()));
    }
  }
  if (any_symmetric) map.symmetric.resize(map.target.size(), CorrespondenceMap::kNone);
  for (std::size_t i = 0; i < map.target.size(); ++i) {
    if (map.target[i] < CorrespondenceMap::kNone) throw ParseError(path.string() + ": negative index", static_cast<std::int64_t>(i) + 1);
  }
  return map;
}

void save_correspondence(const CorrespondenceMap& map, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < map.target.size(); ++i) {
    out += std::to_string(map.target[i]);
    if (map.has_symmetric()) out += " " + std::to_string(map.symmetric[i]);
    out += "\n";
  }
  io::write_file_atomic(path, out);
}

}  // namespace specdesc
