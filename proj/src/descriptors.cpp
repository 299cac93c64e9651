#include "specdesc/descriptors.hpp"

#include "specdesc/io.hpp"

#include <json.hpp>

#include <Eigen/QR>

#include <cmath>
#include <cstring>
#include <sstream>

namespace specdesc {

namespace {

constexpr char kDescriptorMagic[8] = {'S', 'D', 'D', 'E', 'S', 'C', 'R', '\0'};
constexpr std::uint32_t kDescriptorVersion = 1;
constexpr int kResponseModelVersion = 1;

Vector log_spaced(Scalar lo, Scalar hi, Index n) {
  if (n == 1) return Vector::Constant(1, std::exp(0.5 * (std::log(lo) + std::log(hi))));
  return Vector::LinSpaced(n, std::log(lo), std::log(hi)).array().exp().matrix();
}

}  // namespace

FrequencyBasis::FrequencyBasis(Scalar nu_max, Index size) : nu_max_(nu_max), size_(size) {
  if (size < 4) throw UsageError("a cubic basis needs at least 4 functions");
  if (!(nu_max > 0) || !std::isfinite(nu_max)) throw UsageError("basis cutoff nu_max must be positive");
}

Vector FrequencyBasis::evaluate(Scalar nu) const {
  Vector b = Vector::Zero(size_);
  const Scalar h = knot_spacing();
  nu = std::max(nu, Scalar{0});
  if (nu >= nu_max_) {
    const Scalar u = (nu - nu_max_) / h;
    if (u < 1) b[size_ - 1] = (1 - u) * (1 - u) * (1 + 2 * u);
    return b;
  }
  // Knot t_j: 0 for j <= 3, (j - 3) h in between, nu_max for j >= m.
  auto knot = [&](Index j) {
    return std::clamp(static_cast<Scalar>(j - 3) * h, Scalar{0}, nu_max_);
  };
  const Index span = std::min<Index>(3 + static_cast<Index>(std::floor(nu / h)), size_ - 1);
  Scalar n[4] = {1, 0, 0, 0}, left[4] = {}, right[4] = {};
  for (int j = 1; j <= 3; ++j) {
    left[j] = nu - knot(span + 1 - j);
    right[j] = knot(span + j) - nu;
    Scalar saved = 0;
    for (int r = 0; r < j; ++r) {
      const Scalar temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  for (int r = 0; r < 4; ++r) b[span - 3 + r] = n[r];
  return b;
}

Matrix FrequencyBasis::evaluate(const Vector& nu) const {
  Matrix out(nu.size(), size_);
  for (Index k = 0; k < nu.size(); ++k) out.row(k) = evaluate(nu[k]).transpose();
  return out;
}

std::string to_string(DescriptorFamily family) {
  switch (family) {
    case DescriptorFamily::Hks: return "hks";
    case DescriptorFamily::Wks: return "wks";
    case DescriptorFamily::ShapeDna: return "shapedna";
    case DescriptorFamily::Learned: return "learned";
    case DescriptorFamily::Geometry: return "geometry";
  }
  return "unknown";
}

DescriptorFamily descriptor_family_from_string(std::string_view name) {
  for (auto f : {DescriptorFamily::Hks, DescriptorFamily::Wks, DescriptorFamily::ShapeDna, DescriptorFamily::Learned,
                 DescriptorFamily::Geometry}) {
    if (to_string(f) == name) return f;
  }
  throw UsageError("unknown descriptor family '" + std::string(name) + "'");
}

DescriptorField hks(const Spectrum& spectrum, const Vector& times) {
  if (spectrum.size() == 0) throw UsageError("HKS needs a nonempty spectrum");
  if ((times.array() <= 0).any()) throw UsageError("HKS times must be positive");
  const Matrix weights = (-spectrum.eigenvalues * times.transpose()).array().exp().matrix();  // s x n
  return {spectrum.squared_eigenvectors() * weights, DescriptorFamily::Hks, {}};
}

DescriptorField wks(const Spectrum& spectrum, const Vector& energies, Scalar sigma) {
  if (spectrum.size() < 2) throw UsageError("WKS needs at least two eigenpairs");
  if ((energies.array() <= 0).any()) throw UsageError("WKS energies must be positive");
  if (!(sigma > 0)) throw UsageError("WKS sigma must be positive");
  const Scalar eps = 1e-8 * spectrum.eigenvalues[1];
  const Index s = spectrum.size(), n = energies.size();

  DescriptorField field{Matrix::Zero(spectrum.num_vertices(), n), DescriptorFamily::Wks, {}};
  Matrix weights = Matrix::Zero(s, n);
  for (Index i = 0; i < n; ++i) {
    const Scalar log_e = std::log(energies[i]);
    bool populated = false;
    for (Index k = 0; k < s; ++k) {
      const Scalar nu = spectrum.eigenvalues[k];
      if (nu <= eps) continue;
      const Scalar z = log_e - std::log(nu);
      weights(k, i) = std::exp(-z * z / (2 * sigma * sigma));
      populated = populated || std::abs(z) <= 3 * sigma;
    }
    if (!populated) {
      weights.col(i).setZero();
      field.warnings.push_back("WKS band " + std::to_string(i) + " at energy " + io::format_double(energies[i]) +
                               " is empty");
      continue;
    }
    weights.col(i) /= weights.col(i).sum();
  }
  field.values = spectrum.squared_eigenvectors() * weights;
  return field;
}

DescriptorField shape_dna_field(const Spectrum& spectrum, Index n) {
  const Vector dna = shape_dna(spectrum, n);
  return {dna.transpose().replicate(spectrum.num_vertices(), 1), DescriptorFamily::ShapeDna, {}};
}

Matrix geometry_vectors(const Spectrum& spectrum, const FrequencyBasis& basis) {
  if (spectrum.size() == 0 || (spectrum.largest() < basis.nu_max() && spectrum.size() < spectrum.num_vertices())) {
    throw UsageError("spectrum ends at nu_s = " + io::format_double(spectrum.size() ? spectrum.largest() : 0.0) +
                     " below the basis cutoff " + io::format_double(basis.nu_max()) +
                     "; compute more eigenpairs");
  }
  const Matrix b = basis.evaluate(spectrum.eigenvalues);  // s x m
  return b.transpose() * spectrum.squared_eigenvectors().transpose();
}

DescriptorField apply_response(const Matrix& g, const ResponseModel& model) {
  if (g.rows() != model.a.cols()) {
    throw UsageError("geometry vectors have dimension " + std::to_string(g.rows()) + " but the model expects " +
                     std::to_string(model.a.cols()));
  }
  return {(model.a * g).transpose(), DescriptorFamily::Learned, {}};
}

Scalar descriptor_distance(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q) {
  if (p.size() != q.size()) throw UsageError("descriptor dimensions differ");
  return (p - q).norm();
}

Vector project_onto_basis(const FrequencyBasis& basis, const std::function<Scalar(Scalar)>& f, Index samples) {
  const Vector nu = Vector::LinSpaced(samples, 0, basis.nu_max());
  Vector y(samples);
  for (Index i = 0; i < samples; ++i) y[i] = f(nu[i]);
  return basis.evaluate(nu).colPivHouseholderQr().solve(y);
}

Vector default_hks_times(Scalar nu2, Scalar nu_max, Index n) {
  if (!(nu2 > 0) || !(nu_max > nu2)) throw UsageError("HKS time range needs 0 < nu_2 < nu_max");
  const Scalar c = 4 * std::log(10.0);
  return log_spaced(c / nu_max, c / nu2, n);
}

WksParameters default_wks_parameters(Scalar nu2, Scalar nu_max, Index n, Scalar sigma_factor,
                                     Index reference_bands) {
  if (!(nu2 > 0) || !(nu_max > nu2)) throw UsageError("WKS energy range needs 0 < nu_2 < nu_max");
  if (n < 1 || reference_bands < 2) throw UsageError("WKS needs at least one band");
  const Scalar lo = std::log(nu2);
  Scalar hi = std::log(nu_max);
  hi -= 0.02 * std::abs(hi);
  hi = std::max(hi, lo);
  WksParameters params;
  const Vector log_e = n == 1 ? Vector(Vector::Constant(1, lo)) : Vector(Vector::LinSpaced(n, lo, hi));
  params.energies = log_e.array().exp().matrix();
  const Scalar spacing = (hi - lo) / static_cast<Scalar>(reference_bands - 1);
  params.sigma = sigma_factor * std::max(spacing, Scalar{1e-4});
  return params;
}

void save_descriptors_csv(const DescriptorField& field, const std::filesystem::path& path) {
  std::string out = "vertex";
  const std::string prefix = to_string(field.family);
  for (Index j = 0; j < field.dimension(); ++j) out += "," + prefix + "_" + std::to_string(j);
  out += '\n';
  for (Index v = 0; v < field.num_vertices(); ++v) {
    out += std::to_string(v);
    for (Index j = 0; j < field.dimension(); ++j) {
      out += ',';
      out += io::format_double(field.values(v, j));
    }
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void save_descriptors_binary(const DescriptorField& field, const std::filesystem::path& path) {
  io::BinaryWriter w;
  w.put_bytes(kDescriptorMagic, sizeof(kDescriptorMagic));
  w.put<std::uint32_t>(kDescriptorVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(field.family));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(field.num_vertices()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(field.dimension()));
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = field.values;
  w.put_bytes(rows.data(), sizeof(Scalar) * static_cast<std::size_t>(rows.size()));
  std::string payload = w.data();
  const std::uint64_t checksum = io::fnv1a64(payload);
  payload.append(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  io::write_file_atomic(path, payload);
}

namespace {

DescriptorField parse_descriptor_csv(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("vertex", 0) != 0) throw ParseError(where + ": missing CSV header", 1);
  std::vector<std::string> columns;
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) columns.push_back(cell);
  }
  const Index n = static_cast<Index>(columns.size()) - 1;
  DescriptorField field;
  if (n > 0) {
    const auto& first = columns[1];
    field.family = descriptor_family_from_string(first.substr(0, first.rfind('_')));
  }
  std::vector<Scalar> values;
  std::int64_t line_no = 1;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    if (std::stoll(cell) != rows) throw ParseError(where + ": vertex rows out of order", line_no);
    Index count = 0;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const Scalar x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ParseError(where + ": bad number '" + cell + "'", line_no);
      values.push_back(x);
      ++count;
    }
    if (count != n) throw ParseError(where + ": expected " + std::to_string(n) + " values", line_no);
    ++rows;
  }
  field.values = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, n);
  return field;
}

}  // namespace

DescriptorField load_descriptors(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  const std::string where = path.string();
  if (path.extension() == ".csv") return parse_descriptor_csv(data, where);

  if (data.size() < sizeof(kDescriptorMagic) + sizeof(std::uint64_t)) throw DataError(where + ": truncated descriptor file");
  const std::string_view payload(data.data(), data.size() - sizeof(std::uint64_t));
  std::uint64_t checksum = 0;
  std::memcpy(&checksum, data.data() + payload.size(), sizeof(checksum));
  if (checksum != io::fnv1a64(payload)) throw DataError(where + ": descriptor checksum mismatch");
  io::BinaryReader r(payload);
  char magic[8];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kDescriptorMagic, sizeof(magic)) != 0) throw DataError(where + ": not a descriptor file");
  if (r.get<std::uint32_t>() != kDescriptorVersion) throw DataError(where + ": unsupported descriptor version");
  DescriptorField field;
  const auto family = r.get<std::uint8_t>();
  if (family > static_cast<std::uint8_t>(DescriptorFamily::Geometry)) throw DataError(where + ": bad family tag");
  field.family = static_cast<DescriptorFamily>(family);
  const auto nv = static_cast<Index>(r.get<std::uint64_t>());
  const auto n = static_cast<Index>(r.get<std::uint64_t>());
  if (r.remaining() != sizeof(Scalar) * static_cast<std::size_t>(nv * n)) throw DataError(where + ": size mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(nv, n);
  r.get_bytes(rows.data(), sizeof(Scalar) * static_cast<std::size_t>(nv * n));
  field.values = rows;
  return field;
}

std::string response_model_to_json(const ResponseModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "specdesc-response-model";
  j["version"] = kResponseModelVersion;
  j["basis"] = {{"kind", "cubic-bspline"}, {"nu_max", model.basis.nu_max()}, {"m", model.basis.size()}};
  j["n"] = model.dimension();
  std::vector<Scalar> a;
  a.reserve(static_cast<std::size_t>(model.a.size()));
  for (Index i = 0; i < model.a.rows(); ++i) {
    for (Index k = 0; k < model.a.cols(); ++k) a.push_back(model.a(i, k));
  }
  j["A"] = a;
  if (model.diagnostics) {
    const auto& d = *model.diagnostics;
    j["training"] = {{"alpha", d.alpha},
                     {"mode", d.mode},
                     {"requested_n", d.requested_dimension},
                     {"eigenvalues", std::vector<Scalar>(d.eigenvalues.begin(), d.eigenvalues.end())}};
  }
  return j.dump(2) + "\n";
}

ResponseModel response_model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("response model is not valid JSON: ") + e.what(), -1);
  }
  try {
    if (j.at("version").get<int>() != kResponseModelVersion) throw DataError("unsupported response model version");
    const auto& basis = j.at("basis");
    if (basis.at("kind").get<std::string>() != "cubic-bspline") throw DataError("unsupported basis kind");
    ResponseModel model;
    model.basis = FrequencyBasis(basis.at("nu_max").get<Scalar>(), basis.at("m").get<Index>());
    const Index n = j.at("n").get<Index>();
    const auto a = j.at("A").get<std::vector<Scalar>>();
    const Index m = model.basis.size();
    if (static_cast<Index>(a.size()) != n * m) throw DataError("response matrix has the wrong size");
    model.a = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(a.data(), n, m);
    if (!model.a.allFinite()) throw DataError("response matrix has non-finite entries");
    if (j.contains("training")) {
      const auto& t = j.at("training");
      ResponseDiagnostics d;
      d.alpha = t.at("alpha").get<Scalar>();
      d.mode = t.at("mode").get<std::string>();
      d.requested_dimension = t.at("requested_n").get<Index>();
      const auto ev = t.at("eigenvalues").get<std::vector<Scalar>>();
      d.eigenvalues = Eigen::Map<const Vector>(ev.data(), static_cast<Index>(ev.size()));
      model.diagnostics = d;
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed response model: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("malformed response model: ") + e.what());
  }
}

void save_response_model(const ResponseModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, response_model_to_json(model));
}

ResponseModel load_response_model(const std::filesystem::path& path) {
  try {
    return response_model_from_json(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace specdesc
