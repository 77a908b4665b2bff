#include "falcon/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "falcon/binary_io.hpp"

namespace falcon {

namespace io {

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw std::runtime_error("short read on " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed on " + path.string());
}

}  // namespace io

VectorSet::VectorSet(std::size_t count, std::size_t dim, std::vector<float> data,
                     std::optional<Metric> metric)
    : count(count), dim(dim), data(std::move(data)), metric(metric) {
  if (count > 0 && dim == 0) throw std::invalid_argument("VectorSet: dim must be >= 1");
  if (this->data.size() != count * dim) {
    throw std::invalid_argument("VectorSet: data length " + std::to_string(this->data.size()) +
                                " != count * dim = " + std::to_string(count * dim));
  }
}

VectorSet VectorSet::slice(std::size_t first, std::size_t n) const {
  if (first + n > count) throw std::out_of_range("VectorSet::slice out of range");
  std::vector<float> rows(data.begin() + static_cast<std::ptrdiff_t>(first * dim),
                          data.begin() + static_cast<std::ptrdiff_t>((first + n) * dim));
  return VectorSet(n, dim, std::move(rows), metric);
}

namespace {

// Shared record walker for fvecs/ivecs: [n: u32][n x 4-byte payload].
template <typename OnRecord>
std::size_t walk_records(std::span<const std::byte> bytes, const char* kind, OnRecord&& on_record) {
  io::ByteReader reader(bytes);
  std::size_t width = 0;
  std::size_t index = 0;
  while (!reader.at_end()) {
    const std::size_t record_offset = reader.offset();
    if (reader.remaining() < 4) {
      throw FormatError(std::string(kind) + ": truncated record header at byte offset " +
                        std::to_string(record_offset));
    }
    const auto n = static_cast<std::int32_t>(reader.u32());
    if (n <= 0) {
      throw FormatError(std::string(kind) + ": non-positive dimension " + std::to_string(n) +
                        " in record " + std::to_string(index));
    }
    if (index == 0) {
      width = static_cast<std::size_t>(n);
    } else if (static_cast<std::size_t>(n) != width) {
      throw FormatError(std::string(kind) + ": inconsistent dimension in record " +
                        std::to_string(index) + " (" + std::to_string(n) + " vs " +
                        std::to_string(width) + ")");
    }
    if (reader.remaining() < width * 4) {
      throw FormatError(std::string(kind) + ": truncated record " + std::to_string(index) +
                        " starting at byte offset " + std::to_string(record_offset));
    }
    on_record(reader, width, index);
    ++index;
  }
  return width;
}

}  // namespace

VectorSet read_fvecs(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  std::vector<float> data;
  std::size_t count = 0;
  const std::size_t dim =
      walk_records(bytes, "fvecs", [&](io::ByteReader& r, std::size_t width, std::size_t index) {
        for (std::size_t i = 0; i < width; ++i) {
          const float v = r.f32();
          if (!std::isfinite(v)) {
            throw FormatError("fvecs: non-finite scalar in record " + std::to_string(index));
          }
          data.push_back(v);
        }
        ++count;
      });
  VectorSet out;
  out.count = count;
  out.dim = dim;
  out.data = std::move(data);
  return out;
}

void write_fvecs(const VectorSet& vectors, const std::filesystem::path& path) {
  std::vector<std::byte> out;
  out.reserve(vectors.count * (vectors.dim + 1) * 4);
  for (std::size_t i = 0; i < vectors.count; ++i) {
    io::append_u32(out, static_cast<std::uint32_t>(vectors.dim));
    for (float v : vectors.row(i)) io::append_f32(out, v);
  }
  io::write_file(path, out);
}

GroundTruth read_ivecs(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  GroundTruth gt;
  gt.k_gt = walk_records(bytes, "ivecs", [&](io::ByteReader& r, std::size_t width, std::size_t) {
    for (std::size_t i = 0; i < width; ++i) gt.ids.push_back(r.u32());
    ++gt.num_queries;
  });
  return gt;
}

void write_ivecs(const GroundTruth& gt, const std::filesystem::path& path) {
  std::vector<std::byte> out;
  out.reserve(gt.num_queries * (gt.k_gt + 1) * 4);
  for (std::size_t q = 0; q < gt.num_queries; ++q) {
    io::append_u32(out, static_cast<std::uint32_t>(gt.k_gt));
    for (auto id : gt.row(q)) io::append_u32(out, id);
  }
  io::write_file(path, out);
}

VectorSet generate_synthetic(std::size_t n, std::size_t d, std::uint64_t seed,
                             Distribution distribution) {
  if (d == 0) throw std::invalid_argument("generate_synthetic: d must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<float> data(n * d);
  if (distribution == Distribution::Uniform01) {
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (auto& v : data) v = dist(rng);
  } else {
    std::normal_distribution<float> dist(0.0f, 1.0f);
    for (auto& v : data) v = dist(rng);
  }
  return VectorSet(n, d, std::move(data));
}

Distribution parse_distribution(const std::string& name) {
  if (name == "uniform01" || name == "uniform") return Distribution::Uniform01;
  if (name == "gaussian" || name == "normal") return Distribution::Gaussian;
  throw std::invalid_argument("unknown distribution: " + name);
}

std::vector<Neighbor> brute_force_knn(const VectorSet& base, std::span<const float> query,
                                      std::size_t k) {
  if (k > base.count) {
    throw std::invalid_argument("brute_force_knn: k=" + std::to_string(k) + " exceeds count=" +
                                std::to_string(base.count));
  }
  if (base.count > 0 && query.size() != base.dim) {
    throw std::invalid_argument("brute_force_knn: query dimension mismatch");
  }
  const Metric metric = base.metric_or_default();
  std::vector<Neighbor> all(base.count);
  for (std::size_t i = 0; i < base.count; ++i) {
    all[i] = {static_cast<NodeId>(i),
              distance_unchecked(metric, query.data(), base.row(i).data(), base.dim)};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    CloserFirst{});
  all.resize(k);
  return all;
}

GroundTruth compute_ground_truth(const VectorSet& base, const VectorSet& queries, std::size_t k) {
  GroundTruth gt;
  gt.num_queries = queries.count;
  gt.k_gt = k;
  gt.ids.reserve(queries.count * k);
  for (std::size_t q = 0; q < queries.count; ++q) {
    for (const auto& n : brute_force_knn(base, queries.row(q), k)) gt.ids.push_back(n.id);
  }
  return gt;
}

}  // namespace falcon
