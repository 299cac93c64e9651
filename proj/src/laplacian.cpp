#include "specdesc/laplacian.hpp"

#include <cmath>

namespace specdesc {

std::string to_string(MassMode mode) { return mode == MassMode::Lumped ? "lumped" : "consistent"; }

MassMode mass_mode_from_string(std::string_view name) {
  if (name == "lumped") return MassMode::Lumped;
  if (name == "consistent") return MassMode::Consistent;
  throw UsageError("unknown mass mode '" + std::string(name) + "' (expected lumped or consistent)");
}

FemOperator assemble_fem(const TriangleMesh& mesh, MassMode mass_mode) {
  const Index nv = mesh.num_vertices();
  const auto& x = mesh.vertices();
  const auto& faces = mesh.faces();

  FemOperator op;
  op.mass_mode = mass_mode;
  std::vector<Triplet> s_entries, m_entries;
  s_entries.reserve(static_cast<std::size_t>(12 * faces.rows()));
  m_entries.reserve(static_cast<std::size_t>(9 * faces.rows()));

  Index clamped_faces = 0;
  for (Index f = 0; f < faces.rows(); ++f) {
    const std::int32_t idx[3] = {faces(f, 0), faces(f, 1), faces(f, 2)};
    const Vector3 p[3] = {x.row(idx[0]).transpose(), x.row(idx[1]).transpose(), x.row(idx[2]).transpose()};
    const Scalar double_area = (p[1] - p[0]).cross(p[2] - p[0]).norm();
    const Scalar area = 0.5 * double_area;
    bool clamped = false;

    for (int k = 0; k < 3; ++k) {
      // Angle at corner k is opposite edge (i, j).
      const int i = (k + 1) % 3, j = (k + 2) % 3;
      const Vector3 u = p[i] - p[k], v = p[j] - p[k];
      Scalar cot = u.dot(v) / double_area;
      if (!std::isfinite(cot) || std::abs(cot) > kMaxCotangent) {
        cot = std::isfinite(cot) ? std::copysign(kMaxCotangent, cot) : kMaxCotangent;
        clamped = true;
      }
      const Scalar w = 0.5 * cot;
      s_entries.emplace_back(idx[i], idx[j], -w);
      s_entries.emplace_back(idx[j], idx[i], -w);
      s_entries.emplace_back(idx[i], idx[i], w);
      s_entries.emplace_back(idx[j], idx[j], w);
    }
    if (clamped) {
      ++clamped_faces;
      op.warnings.push_back("face " + std::to_string(f) + ": cotangent clamped to " + std::to_string(kMaxCotangent));
    }

    if (mass_mode == MassMode::Lumped) {
      for (auto v : idx) m_entries.emplace_back(v, v, area / 3.0);
    } else {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) m_entries.emplace_back(idx[a], idx[b], a == b ? area / 6.0 : area / 12.0);
      }
    }
  }
  if (clamped_faces == faces.rows()) throw NumericalError("every face of the mesh is numerically degenerate");

  op.stiffness.resize(nv, nv);
  op.stiffness.setFromTriplets(s_entries.begin(), s_entries.end());
  op.mass.resize(nv, nv);
  op.mass.setFromTriplets(m_entries.begin(), m_entries.end());
  op.stiffness.makeCompressed();
  op.mass.makeCompressed();
  return op;
}

}  // namespace specdesc
