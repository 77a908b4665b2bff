#pragma once

// Binary request/response protocol of the search service. All integers are
// little-endian u32, all scalars little-endian IEEE-754 binary32.
//
// Request:  "FALC" version k l algorithm mg mc batch_size dim | batch_size * dim f32
// Response: one record per query, in arrival order:
//           query_index status count | count * (id u32, distance f32)
//
// k, l, mg or mc equal to zero select the server's default for that field.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "falcon/traversal.hpp"
#include "falcon/types.hpp"

namespace falcon::wire {

inline constexpr std::array<char, 4> kRequestMagic = {'F', 'A', 'L', 'C'};
inline constexpr std::uint32_t kProtocolVersion = 1;
inline constexpr std::size_t kRequestHeaderBytes = 4 + 8 * 4;
inline constexpr std::size_t kResponseHeaderBytes = 3 * 4;
/// query_index of a record that reports a connection-level error.
inline constexpr std::uint32_t kNoQuery = 0xFFFFFFFFu;

enum class Status : std::uint32_t {
  Ok = 0,
  BadMagic = 1,
  BadVersion = 2,
  BadParams = 3,
  DimMismatch = 4,
  InternalError = 5,
};

std::string_view to_string(Status status) noexcept;

class WireError : public std::runtime_error {
 public:
  WireError(Status status, const std::string& what) : std::runtime_error(what), status_(status) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

struct RequestHeader {
  std::uint32_t version = kProtocolVersion;
  std::uint32_t k = 0;
  std::uint32_t l = 0;
  std::uint32_t algorithm = 0;
  std::uint32_t mg = 0;
  std::uint32_t mc = 0;
  std::uint32_t batch_size = 0;
  std::uint32_t dim = 0;

  friend bool operator==(const RequestHeader&, const RequestHeader&) = default;
};

struct Request {
  RequestHeader header;
  /// batch_size * dim scalars, row-major.
  std::vector<float> queries;

  std::span<const float> query(std::size_t i) const noexcept {
    return {queries.data() + i * header.dim, header.dim};
  }

  friend bool operator==(const Request&, const Request&) = default;
};

struct Response {
  std::uint32_t query_index = 0;
  Status status = Status::Ok;
  std::vector<Neighbor> neighbors;

  friend bool operator==(const Response&, const Response&) = default;
};

std::uint32_t algorithm_code(Algorithm algorithm) noexcept;

/// Throws WireError(BadMagic / BadVersion) on a malformed header. `bytes` must
/// hold at least kRequestHeaderBytes.
RequestHeader decode_request_header(std::span<const std::byte> bytes);
std::vector<std::byte> encode_request_header(const RequestHeader& header);

std::vector<std::byte> encode_request(const Request& request);
/// Throws WireError on bad magic/version, zero batch or dim, or a length mismatch.
Request decode_request(std::span<const std::byte> bytes);

std::vector<std::byte> encode_response(const Response& response);
void append_response(std::vector<std::byte>& out, const Response& response);
/// Decodes one record from the front of `bytes`; returns nullopt if incomplete.
std::optional<Response> decode_response(std::span<const std::byte> bytes, std::size_t* consumed = nullptr);

/// Fills unset fields from `defaults` and validates. Throws WireError(BadParams).
SearchParams resolve_params(const RequestHeader& header, const SearchParams& defaults);

}  // namespace falcon::wire
