#pragma once

#include "specdesc/eval.hpp"

#include <filesystem>

namespace specdesc {

struct ReportRoc {
  std::string label;
  RocCurve curve;
};

struct ReportCmc {
  std::string label;
  CmcCurve curve;
};

/// A per-vertex scalar field in [0, 1] drawn on a mesh.
struct ReportMap {
  std::string label;
  const TriangleMesh* mesh = nullptr;
  Vector values;
};

struct ReportTable {
  std::string label;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::vector<ReportRoc> rocs;
  std::vector<ReportCmc> cmcs;
  std::vector<ReportMap> maps;
  std::vector<ReportTable> tables;
};

/// Writes roc_NNN.{csv,svg}, cmc_NNN.{csv,svg}, map_NNN.{csv,off} and
/// table_NNN.csv into `out_dir`, plus manifest.txt listing each file with its
/// kind and label. Returns the file names in manifest order.
std::vector<std::string> emit_report(const Report& report, const std::filesystem::path& out_dir);

std::string table_to_csv(const ReportTable& table);

/// Piecewise-linear blue-to-red colour ramp for values in [0, 1].
std::array<float, 4> colormap(Scalar value);

}  // namespace specdesc
