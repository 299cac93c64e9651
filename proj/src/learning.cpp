#include "specdesc/learning.hpp"

#include "specdesc/eval.hpp"
#include "specdesc/io.hpp"
#include "specdesc/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstring>
#include <map>

namespace specdesc {

namespace {

constexpr char kPairMagic[8] = {'S', 'D', 'P', 'A', 'I', 'R', 'S', '\0'};
constexpr std::uint32_t kPairVersion = 1;

// Collects the distinct (shape, vertex) vectors referenced by triplets.
class PoolBuilder {
 public:
  Index add(Index shape, Index vertex) {
    const VectorOrigin key{static_cast<std::int32_t>(shape), static_cast<std::int32_t>(vertex)};
    auto [it, inserted] = index_.emplace(key, static_cast<Index>(origins_.size()));
    if (inserted) origins_.push_back(key);
    return it->second;
  }
  const std::vector<VectorOrigin>& origins() const { return origins_; }

 private:
  std::map<VectorOrigin, Index> index_;
  std::vector<VectorOrigin> origins_;
};

struct Candidate {
  Index shape;
  Index vertex;
  PairTag tag;
};

// Balls around x and its symmetric image, when there is one.
std::vector<Index> ball_sources(Index x, const CorrespondenceMap* symmetry) {
  std::vector<Index> sources{x};
  if (symmetry != nullptr) {
    const auto s = (*symmetry)[x];
    if (s != CorrespondenceMap::kNone && s != x) sources.push_back(s);
  }
  return sources;
}

}  // namespace

std::string to_string(PairTag tag) {
  switch (tag) {
    case PairTag::Localization: return "localization";
    case PairTag::Invariance: return "invariance";
    case PairTag::Discriminativity: return "discriminativity";
  }
  return "unknown";
}

Index PairSet::count(PairTag tag) const {
  return static_cast<Index>(std::count_if(triplets.begin(), triplets.end(), [&](const PairTriplet& t) {
    return t.positive_tag == tag || t.negative_tag == tag;
  }));
}

Index PairSet::count_positive(PairTag tag) const {
  return static_cast<Index>(std::count_if(triplets.begin(), triplets.end(), [&](const PairTriplet& t) { return t.positive_tag == tag; }));
}

Index PairSet::count_negative(PairTag tag) const {
  return static_cast<Index>(std::count_if(triplets.begin(), triplets.end(), [&](const PairTriplet& t) { return t.negative_tag == tag; }));
}

PairSet build_pairs(std::span<const PairShape> shapes, const PairOptions& options) {
  if (shapes.empty()) throw UsageError("pair sampling needs at least one shape");
  if (!(options.r_frac > 0 && options.r_frac < options.R_frac)) throw UsageError("need 0 < r_frac < R_frac");
  if (options.positives_per_ref < 1 || options.negatives_per_ref < 1 || options.refs_per_shape < 1) {
    throw UsageError("pair counts per reference must be positive");
  }
  const Index m = shapes.front().geometry->rows();
  for (const auto& s : shapes) {
    if (s.mesh == nullptr || s.geometry == nullptr) throw UsageError("shape '" + s.name + "' lacks mesh or geometry");
    if (s.geometry->rows() != m || s.geometry->cols() != s.mesh->num_vertices()) {
      throw UsageError("shape '" + s.name + "' has geometry vectors of the wrong size");
    }
    if (!(s.diameter > 0)) throw UsageError("shape '" + s.name + "' needs a positive diameter");
  }

  const auto count = static_cast<Index>(shapes.size());
  std::vector<std::vector<Index>> derived(static_cast<std::size_t>(count));
  for (Index j = 0; j < count; ++j) {
    const auto& s = shapes[static_cast<std::size_t>(j)];
    if (s.null_shape >= 0 && s.from_null != nullptr) {
      if (s.null_shape >= count) throw UsageError("shape '" + s.name + "' names an unknown null shape");
      derived[static_cast<std::size_t>(s.null_shape)].push_back(j);
    }
  }

  // Inverse vertex maps back to the null shape; the first preimage wins.
  std::vector<std::vector<Index>> to_null(static_cast<std::size_t>(count));
  for (Index j = 0; j < count; ++j) {
    const auto& s = shapes[static_cast<std::size_t>(j)];
    if (s.null_shape < 0 || s.from_null == nullptr || s.negatives_only) continue;
    auto& inv = to_null[static_cast<std::size_t>(j)];
    inv.assign(static_cast<std::size_t>(s.mesh->num_vertices()), -1);
    for (Index y = 0; y < s.from_null->size(); ++y) {
      const auto img = (*s.from_null)[y];
      if (img != CorrespondenceMap::kNone && inv[static_cast<std::size_t>(img)] < 0) inv[static_cast<std::size_t>(img)] = y;
    }
  }

  PairSet out;
  for (const auto& s : shapes) out.shape_names.push_back(s.name);
  PoolBuilder pool;
  constexpr int kAttempts = 10;

  for (Index si = 0; si < count; ++si) {
    const auto& shape = shapes[static_cast<std::size_t>(si)];
    if (shape.negatives_only) continue;
    const TriangleMesh& mesh = *shape.mesh;
    const Index nv = mesh.num_vertices();
    const Scalar r = options.r_frac * shape.diameter, big_r = options.R_frac * shape.diameter;
    const Index group_null = shape.null_shape >= 0 && shape.from_null != nullptr ? shape.null_shape : si;
    std::vector<Index> group{group_null};
    group.insert(group.end(), derived[static_cast<std::size_t>(group_null)].begin(),
                 derived[static_cast<std::size_t>(group_null)].end());
    std::vector<Index> other_class;
    for (Index j = 0; j < count; ++j) {
      if (shapes[static_cast<std::size_t>(j)].class_label != shape.class_label) other_class.push_back(j);
    }

    for (Index ref = 0; ref < options.refs_per_shape; ++ref) {
      auto rng = make_stream(options.seed, {static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(ref)});
      std::uniform_real_distribution<Scalar> unit;
      Index x = -1;
      std::vector<Candidate> local, invariant;
      std::vector<bool> near;
      for (int attempt = 0; attempt < kAttempts && x < 0; ++attempt) {
        const Index candidate = uniform_index(rng, nv);
        const auto sources = ball_sources(candidate, shape.symmetry);
        const auto ball = geodesic_ball(mesh, sources, big_r);
        local.clear();
        invariant.clear();
        near.assign(static_cast<std::size_t>(nv), false);
        for (std::size_t k = 0; k < ball.vertices.size(); ++k) {
          near[static_cast<std::size_t>(ball.vertices[k])] = true;
          if (ball.distances[k] < r && ball.vertices[k] != candidate) {
            local.push_back({si, ball.vertices[k], PairTag::Localization});
          }
        }
        // Preimages on the null shape, then their images on every other member of the group.
        std::vector<Index> on_null;
        for (Index src : sources) {
          const Index y = group_null == si ? src : to_null[static_cast<std::size_t>(si)][static_cast<std::size_t>(src)];
          if (y >= 0) on_null.push_back(y);
        }
        for (Index d : group) {
          if (d == si || on_null.empty()) continue;
          const auto& target = shapes[static_cast<std::size_t>(d)];
          std::vector<Index> images;
          for (Index y : on_null) {
            const auto img = d == group_null ? y : (*target.from_null)[y];
            if (img != CorrespondenceMap::kNone) images.push_back(img);
          }
          if (images.empty()) continue;
          std::sort(images.begin(), images.end());
          images.erase(std::unique(images.begin(), images.end()), images.end());
          for (Index v : images) invariant.push_back({d, v, PairTag::Invariance});
        }
        if (local.empty() && invariant.empty()) {
          out.warnings.push_back("shape '" + shape.name + "': r-ball of vertex " + std::to_string(candidate) +
                                 " holds no other vertex; resampling the reference");
          continue;
        }
        x = candidate;
      }
      if (x < 0) {
        throw DataError("shape '" + shape.name + "': no reference point with a nonempty r-ball after " +
                        std::to_string(kAttempts) + " attempts");
      }
      const bool has_far = std::find(near.begin(), near.end(), false) != near.end();
      if (!has_far && other_class.empty()) {
        throw DataError("shape '" + shape.name + "': no valid negatives outside the R-ball");
      }

      const Index px = pool.add(si, x);
      std::vector<Candidate> positives;
      for (Index j = 0; j < options.positives_per_ref; ++j) {
        const bool use_invariant = !invariant.empty() && (local.empty() || j % 2 == 1);
        const auto& source = use_invariant ? invariant : local;
        positives.push_back(source[static_cast<std::size_t>(uniform_index(rng, static_cast<Index>(source.size())))]);
      }
      for (Index i = 0; i < options.negatives_per_ref; ++i) {
        Candidate neg{};
        const bool cross = !other_class.empty() && (!has_far || unit(rng) < options.discriminative_fraction);
        if (cross) {
          const Index j = other_class[static_cast<std::size_t>(uniform_index(rng, static_cast<Index>(other_class.size())))];
          neg = {j, uniform_index(rng, shapes[static_cast<std::size_t>(j)].mesh->num_vertices()), PairTag::Discriminativity};
        } else {
          Index v = 0;
          do {
            v = uniform_index(rng, nv);
          } while (near[static_cast<std::size_t>(v)]);
          neg = {si, v, PairTag::Localization};
        }
        const auto& pos = positives[static_cast<std::size_t>(i % options.positives_per_ref)];
        PairTriplet t;
        t.reference = px;
        t.positive = pool.add(pos.shape, pos.vertex);
        t.negative = pool.add(neg.shape, neg.vertex);
        t.positive_tag = pos.tag;
        t.negative_tag = neg.tag;
        out.triplets.push_back(t);
      }
    }
  }

  out.origins = pool.origins();
  out.pool.resize(m, static_cast<Index>(out.origins.size()));
  for (std::size_t u = 0; u < out.origins.size(); ++u) {
    const auto& o = out.origins[u];
    out.pool.col(static_cast<Index>(u)) = shapes[static_cast<std::size_t>(o.shape)].geometry->col(o.vertex);
  }
  return out;
}

CovarianceStats estimate_covariances(const PairSet& pairs, Scalar ridge) {
  const Index m = pairs.dimension();
  const Index t = pairs.size();
  if (t == 0) throw UsageError("covariance estimation needs at least one triplet");
  for (Index u = 0; u < pairs.pool.cols(); ++u) {
    if (!pairs.pool.col(u).allFinite()) {
      const auto& o = pairs.origins[static_cast<std::size_t>(u)];
      const std::string name = o.shape < static_cast<std::int32_t>(pairs.shape_names.size())
                                   ? pairs.shape_names[static_cast<std::size_t>(o.shape)]
                                   : std::to_string(o.shape);
      throw DataError("non-finite geometry vector from shape '" + name + "', vertex " + std::to_string(o.vertex));
    }
  }
  CovarianceStats stats;
  stats.samples_pos = stats.samples_neg = t;
  stats.samples = 3 * t;
  stats.ridge = ridge;
  if (ridge <= 0 && stats.samples < m + 1) {
    throw UsageError("C needs at least m + 1 = " + std::to_string(m + 1) +
                     " samples without a ridge; supply more pairs or a positive ridge");
  }

  Vector weight = Vector::Zero(pairs.pool.cols());
  for (const auto& tr : pairs.triplets) {
    weight[tr.reference] += 1;
    weight[tr.positive] += 1;
    weight[tr.negative] += 1;
  }
  const Matrix scaled = pairs.pool * weight.cwiseSqrt().asDiagonal();
  stats.c = Matrix::Zero(m, m);
  stats.c.selfadjointView<Eigen::Lower>().rankUpdate(scaled);

  stats.c_pos = Matrix::Zero(m, m);
  stats.c_neg = Matrix::Zero(m, m);
  constexpr Index kChunk = 4096;
  Matrix e_pos(m, kChunk), e_neg(m, kChunk);
  for (Index start = 0; start < t; start += kChunk) {
    const Index len = std::min(kChunk, t - start);
    for (Index i = 0; i < len; ++i) {
      const auto& tr = pairs.triplets[static_cast<std::size_t>(start + i)];
      e_pos.col(i) = pairs.pool.col(tr.reference) - pairs.pool.col(tr.positive);
      e_neg.col(i) = pairs.pool.col(tr.reference) - pairs.pool.col(tr.negative);
    }
    stats.c_pos.selfadjointView<Eigen::Lower>().rankUpdate(e_pos.leftCols(len));
    stats.c_neg.selfadjointView<Eigen::Lower>().rankUpdate(e_neg.leftCols(len));
  }
  for (Matrix* c : {&stats.c, &stats.c_pos, &stats.c_neg}) {
    *c = c->selfadjointView<Eigen::Lower>();
  }
  stats.c /= static_cast<Scalar>(stats.samples);
  stats.c_pos /= static_cast<Scalar>(t);
  stats.c_neg /= static_cast<Scalar>(t);
  if (ridge > 0) stats.c.diagonal().array() += ridge * stats.c.trace() / static_cast<Scalar>(m);
  return stats;
}

LearnedModel solve_response(const CovarianceStats& stats, Scalar alpha, Index n, const FrequencyBasis& basis) {
  const Index m = stats.c.rows();
  if (!(alpha >= 0 && alpha <= 1)) throw UsageError("alpha must lie in [0, 1]");
  if (n < 1 || n >= m) throw UsageError("descriptor dimension must lie in [1, m)");
  if (basis.size() != m) throw UsageError("basis size differs from the covariance dimension");

  const Eigen::SelfAdjointEigenSolver<Matrix> c_eig(stats.c);
  if (c_eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of C failed");
  const Vector lc = c_eig.eigenvalues();
  if (!(lc[0] > 1e-14 * lc[m - 1])) {
    throw NumericalError("C is numerically singular (eigenvalue ratio " + io::format_double(lc[0] / lc[m - 1]) +
                         "); raise the ridge");
  }
  const Matrix whiten = c_eig.eigenvectors() * lc.cwiseSqrt().cwiseInverse().asDiagonal() *
                        c_eig.eigenvectors().transpose();
  const Matrix d = (1 - alpha) * stats.c_pos - alpha * stats.c_neg;
  Matrix w = whiten * d * whiten;
  w = 0.5 * (w + w.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> d_eig(w);
  if (d_eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the whitened difference failed");

  Index kept = 0;
  while (kept < n && d_eig.eigenvalues()[kept] < 0) ++kept;
  if (kept == 0) {
    throw NumericalError("no negative eigenvalue at alpha = " + io::format_double(alpha) +
                         ": alpha too small or the data are inseparable");
  }
  Matrix u = d_eig.eigenvectors().leftCols(kept);
  for (Index k = 0; k < kept; ++k) {
    Index arg = 0;
    u.col(k).cwiseAbs().maxCoeff(&arg);
    if (u(arg, k) < 0) u.col(k) *= -1;
  }
  LearnedModel out;
  out.alpha = alpha;
  out.requested_dimension = n;
  out.eigenvalues = d_eig.eigenvalues().head(kept);
  out.model.basis = basis;
  out.model.a = u.transpose() * whiten;
  out.model.diagnostics = ResponseDiagnostics{alpha, "", n, out.eigenvalues};
  return out;
}

Scalar response_objective(const Matrix& a, const CovarianceStats& stats, Scalar alpha) {
  const Matrix d = (1 - alpha) * stats.c_pos - alpha * stats.c_neg;
  return (a * d * a.transpose()).trace();
}

PairDistances pair_distances(const PairSet& pairs, const Matrix& a) {
  if (a.cols() != pairs.dimension()) throw UsageError("response matrix does not match the pair dimension");
  const Matrix p = a * pairs.pool;
  PairDistances out;
  out.positive.reserve(pairs.triplets.size());
  out.negative.reserve(pairs.triplets.size());
  for (const auto& t : pairs.triplets) {
    out.positive.push_back((p.col(t.reference) - p.col(t.positive)).norm());
    out.negative.push_back((p.col(t.reference) - p.col(t.negative)).norm());
  }
  return out;
}

PairDistances pair_distances(const PairSet& pairs, std::span<const Matrix* const> fields) {
  auto row = [&](Index u) {
    const auto& o = pairs.origins[static_cast<std::size_t>(u)];
    if (o.shape < 0 || static_cast<std::size_t>(o.shape) >= fields.size() || fields[static_cast<std::size_t>(o.shape)] == nullptr) {
      throw UsageError("no descriptor field for shape " + std::to_string(o.shape));
    }
    return fields[static_cast<std::size_t>(o.shape)]->row(o.vertex);
  };
  PairDistances out;
  for (const auto& t : pairs.triplets) {
    out.positive.push_back((row(t.reference) - row(t.positive)).norm());
    out.negative.push_back((row(t.reference) - row(t.negative)).norm());
  }
  return out;
}

std::string to_string(SweepMode mode) { return mode == SweepMode::Sensitivity ? "sensitivity" : "specificity"; }

SweepMode sweep_mode_from_string(std::string_view name) {
  if (name == "sensitivity") return SweepMode::Sensitivity;
  if (name == "specificity") return SweepMode::Specificity;
  throw UsageError("unknown sweep mode '" + std::string(name) + "'");
}

SweepResult sweep_alpha(const CovarianceStats& stats, std::span<const Scalar> alphas, Index n,
                        const FrequencyBasis& basis, const PairSet& eval_pairs, Scalar work_point) {
  if (alphas.empty()) throw UsageError("the alpha grid is empty");
  SweepResult result;
  const SweepRow* best_fn = nullptr;
  const SweepRow* best_fp = nullptr;
  result.rows.reserve(alphas.size());
  for (Scalar alpha : alphas) {
    SweepRow row;
    row.alpha = alpha;
    try {
      const auto learned = solve_response(stats, alpha, n, basis);
      row.achieved_n = learned.achieved_dimension();
      const auto d = pair_distances(eval_pairs, learned.model.a);
      const auto [lo_p, hi_p] = std::minmax_element(d.positive.begin(), d.positive.end());
      const auto [lo_n, hi_n] = std::minmax_element(d.negative.begin(), d.negative.end());
      if (*lo_p == *hi_p && *lo_n == *hi_n && *lo_p == *lo_n) {
        throw NumericalError("degenerate ROC: every distance is equal");
      }
      const auto curve = roc(d.positive, d.negative);
      row.fn_at_fp = 1 - rate_at(curve, FixedRate::FalsePositive, work_point);
      row.fp_at_fn = 1 - rate_at(curve, FixedRate::FalseNegative, work_point);
    } catch (const NumericalError& e) {
      row.fn_at_fp = row.fp_at_fn = std::numeric_limits<Scalar>::quiet_NaN();
      row.error = e.what();
    }
    result.rows.push_back(row);
  }
  for (const auto& row : result.rows) {
    if (!row.error.empty()) continue;
    if (best_fn == nullptr || row.fn_at_fp < best_fn->fn_at_fp) best_fn = &row;
    if (best_fp == nullptr || row.fp_at_fn < best_fp->fp_at_fn) best_fp = &row;
  }
  if (best_fn == nullptr) throw NumericalError("training failed at every alpha of the sweep");
  result.best_sensitivity = best_fn->alpha;
  result.best_specificity = best_fp->alpha;
  return result;
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::string out = "alpha,fn_at_fp,fp_at_fn,achieved_n\n";
  for (const auto& row : sweep.rows) {
    out += io::format_double(row.alpha) + "," + io::format_double(row.fn_at_fp) + "," +
           io::format_double(row.fp_at_fn) + "," + std::to_string(row.achieved_n) + "\n";
  }
  return out;
}

void save_pairs(const PairSet& pairs, const std::filesystem::path& path) {
  io::BinaryWriter w;
  w.put_bytes(kPairMagic, sizeof(kPairMagic));
  w.put<std::uint32_t>(kPairVersion);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(pairs.dimension()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(pairs.pool.cols()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(pairs.size()));
  for (auto tag : {PairTag::Localization, PairTag::Invariance, PairTag::Discriminativity}) {
    w.put<std::uint64_t>(static_cast<std::uint64_t>(pairs.count(tag)));
  }
  w.put<std::uint64_t>(pairs.shape_names.size());
  for (const auto& name : pairs.shape_names) w.put_string(name);
  for (const auto& o : pairs.origins) {
    w.put<std::int32_t>(o.shape);
    w.put<std::int32_t>(o.vertex);
  }
  w.put_bytes(pairs.pool.data(), sizeof(Scalar) * static_cast<std::size_t>(pairs.pool.size()));
  for (const auto& t : pairs.triplets) {
    w.put<std::uint64_t>(static_cast<std::uint64_t>(t.reference));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(t.positive));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(t.negative));
  }
  for (const auto& t : pairs.triplets) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.positive_tag));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.negative_tag));
  }
  std::string payload = w.data();
  const std::uint64_t checksum = io::fnv1a64(payload);
  payload.append(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  io::write_file_atomic(path, payload);
}

PairSet load_pairs(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  const std::string where = path.string();
  if (data.size() < sizeof(kPairMagic) + sizeof(std::uint64_t)) throw DataError(where + ": truncated pair file");
  const std::string_view payload(data.data(), data.size() - sizeof(std::uint64_t));
  std::uint64_t checksum = 0;
  std::memcpy(&checksum, data.data() + payload.size(), sizeof(checksum));
  if (checksum != io::fnv1a64(payload)) throw DataError(where + ": pair file checksum mismatch");
  io::BinaryReader r(payload);
  char magic[8];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kPairMagic, sizeof(magic)) != 0) throw DataError(where + ": not a pair file");
  if (r.get<std::uint32_t>() != kPairVersion) throw DataError(where + ": unsupported pair file version");
  PairSet pairs;
  const auto m = static_cast<Index>(r.get<std::uint64_t>());
  const auto u = static_cast<Index>(r.get<std::uint64_t>());
  const auto t = static_cast<Index>(r.get<std::uint64_t>());
  for (int k = 0; k < 3; ++k) r.get<std::uint64_t>();
  const auto names = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < names; ++i) pairs.shape_names.push_back(r.get_string());
  for (Index i = 0; i < u; ++i) {
    VectorOrigin o;
    o.shape = r.get<std::int32_t>();
    o.vertex = r.get<std::int32_t>();
    pairs.origins.push_back(o);
  }
  if (r.remaining() != sizeof(Scalar) * static_cast<std::size_t>(m * u) + static_cast<std::size_t>(t) * (3 * 8 + 2)) {
    throw DataError(where + ": pair file size mismatch");
  }
  pairs.pool.resize(m, u);
  r.get_bytes(pairs.pool.data(), sizeof(Scalar) * static_cast<std::size_t>(m * u));
  pairs.triplets.resize(static_cast<std::size_t>(t));
  for (auto& tr : pairs.triplets) {
    tr.reference = static_cast<Index>(r.get<std::uint64_t>());
    tr.positive = static_cast<Index>(r.get<std::uint64_t>());
    tr.negative = static_cast<Index>(r.get<std::uint64_t>());
    if (tr.reference >= u || tr.positive >= u || tr.negative >= u) throw DataError(where + ": triplet index out of range");
  }
  for (auto& tr : pairs.triplets) {
    const auto p = r.get<std::uint8_t>(), n = r.get<std::uint8_t>();
    if (p > 2 || n > 2) throw DataError(where + ": bad provenance tag");
    tr.positive_tag = static_cast<PairTag>(p);
    tr.negative_tag = static_cast<PairTag>(n);
  }
  return pairs;
}

}  // namespace specdesc
