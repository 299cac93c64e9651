#include "specdesc/spectrum.hpp"

#include "specdesc/io.hpp"

#include <cstring>

namespace specdesc {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'S', 'P', 'E', 'C', 'T', '\0'};

void normalize_signs(Matrix& vectors) {
  for (Index k = 0; k < vectors.cols(); ++k) {
    Index arg = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, k) < 0) vectors.col(k) *= -1;
  }
}

}  // namespace

Spectrum compute_spectrum(const FemOperator& op, const SpectrumOptions& options) {
  const Index n = op.size();
  if (options.count < 1 || options.count > n) {
    throw UsageError("spectrum size must lie in [1, V]; got " + std::to_string(options.count));
  }
  const Index wanted = std::min(n, options.count + options.cluster_extension);

  EigenpairResult pairs;
  const Index bs = options.lanczos.block_size;
  if (n < options.dense_below || 2 * wanted + 4 * bs > n) {
    pairs = dense_generalized_eigenpairs(op.stiffness, op.mass, wanted);
  } else {
    // A shift just below zero makes the factorization nearly singular and
    // limits eigenvector accuracy to about 1e-8; a small fraction of the
    // typical frequency keeps it well conditioned.
    const Scalar shift = -1e-3 * op.stiffness.diagonal().sum() / op.mass.diagonal().sum();
    pairs = shift_invert_lanczos(op.stiffness, op.mass, wanted, shift, options.lanczos);
  }

  Spectrum spectrum;
  spectrum.mass_mode = op.mass_mode;
  Index keep = options.count;
  auto tied = [&](Index i) {
    const Scalar a = pairs.values[i - 1], b = pairs.values[i];
    return b - a <= options.cluster_gap * std::max(std::abs(b), Scalar{1e-300});
  };
  while (keep < wanted && tied(keep)) ++keep;
  if (keep == wanted && keep > options.count && keep < n) {
    spectrum.warnings.push_back("degenerate eigenvalue cluster at index " + std::to_string(keep) +
                                " extends past the cluster extension limit");
  }
  spectrum.eigenvalues = pairs.values.head(keep);
  spectrum.eigenvectors = pairs.vectors.leftCols(keep);
  normalize_signs(spectrum.eigenvectors);
  spectrum.vertex_mass = op.mass * Vector::Ones(n);
  return spectrum;
}

Spectrum compute_spectrum(const FemOperator& op, Index count) {
  SpectrumOptions options;
  options.count = count;
  return compute_spectrum(op, options);
}

Scalar max_relative_residual(const FemOperator& op, const Spectrum& spectrum, Scalar floor) {
  Scalar worst = 0;
  const Matrix sx = op.stiffness * spectrum.eigenvectors;
  const Matrix mx = op.mass * spectrum.eigenvectors;
  for (Index k = 0; k < spectrum.size(); ++k) {
    const Scalar res = (sx.col(k) - spectrum.eigenvalues[k] * mx.col(k)).norm();
    const Scalar scale = sx.col(k).norm();
    worst = std::max(worst, scale > floor ? res / scale : res);
  }
  return worst;
}

Vector shape_dna(const Spectrum& spectrum, Index n) {
  if (n < 0 || n > spectrum.size()) {
    throw UsageError("shape DNA length " + std::to_string(n) + " exceeds spectrum size " +
                     std::to_string(spectrum.size()));
  }
  return spectrum.eigenvalues.head(n);
}

std::uint64_t spectrum_cache_hash(std::string_view mesh_bytes, Index count, MassMode mode) {
  std::uint64_t h = io::fnv1a64(mesh_bytes);
  const std::string params = "count=" + std::to_string(count) + ";mass=" + to_string(mode) +
                             ";version=" + std::to_string(kSpectrumCacheVersion);
  return io::fnv1a64(params, h);
}

void save_spectrum(const Spectrum& spectrum, std::uint64_t content_hash, const std::filesystem::path& path) {
  io::BinaryWriter w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kSpectrumCacheVersion);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(spectrum.num_vertices()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(spectrum.size()));
  w.put<std::uint8_t>(spectrum.mass_mode == MassMode::Lumped ? 0 : 1);
  w.put<std::uint64_t>(content_hash);
  w.put_bytes(spectrum.eigenvalues.data(), sizeof(Scalar) * static_cast<std::size_t>(spectrum.size()));
  w.put_bytes(spectrum.eigenvectors.data(), sizeof(Scalar) * static_cast<std::size_t>(spectrum.eigenvectors.size()));
  w.put_bytes(spectrum.vertex_mass.data(), sizeof(Scalar) * static_cast<std::size_t>(spectrum.vertex_mass.size()));
  std::string payload = w.data();
  const std::uint64_t checksum = io::fnv1a64(payload);
  payload.append(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  io::write_file_atomic(path, payload);
}

CachedSpectrum load_spectrum(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  if (data.size() < sizeof(kMagic) + sizeof(std::uint64_t)) throw DataError(path.string() + ": truncated spectrum cache");
  const std::string_view payload(data.data(), data.size() - sizeof(std::uint64_t));
  std::uint64_t checksum = 0;
  std::memcpy(&checksum, data.data() + payload.size(), sizeof(checksum));
  if (checksum != io::fnv1a64(payload)) throw DataError(path.string() + ": spectrum cache checksum mismatch");

  io::BinaryReader r(payload);
  char magic[8];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DataError(path.string() + ": not a spectrum cache");
  if (r.get<std::uint32_t>() != kSpectrumCacheVersion) throw DataError(path.string() + ": unsupported cache version");
  const auto nv = static_cast<Index>(r.get<std::uint64_t>());
  const auto s = static_cast<Index>(r.get<std::uint64_t>());
  CachedSpectrum out;
  out.spectrum.mass_mode = r.get<std::uint8_t>() == 0 ? MassMode::Lumped : MassMode::Consistent;
  out.content_hash = r.get<std::uint64_t>();
  const std::size_t expected = sizeof(Scalar) * static_cast<std::size_t>(s + nv * s + nv);
  if (r.remaining() != expected) throw DataError(path.string() + ": spectrum cache size mismatch");
  out.spectrum.eigenvalues.resize(s);
  out.spectrum.eigenvectors.resize(nv, s);
  out.spectrum.vertex_mass.resize(nv);
  r.get_bytes(out.spectrum.eigenvalues.data(), sizeof(Scalar) * static_cast<std::size_t>(s));
  r.get_bytes(out.spectrum.eigenvectors.data(), sizeof(Scalar) * static_cast<std::size_t>(nv * s));
  r.get_bytes(out.spectrum.vertex_mass.data(), sizeof(Scalar) * static_cast<std::size_t>(nv));
  return out;
}

}  // namespace specdesc
