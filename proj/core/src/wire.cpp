#include "falcon/wire.hpp"

#include <string>

#include "falcon/binary_io.hpp"

namespace falcon::wire {

std::string_view to_string(Status status) noexcept {
  switch (status) {
    case Status::Ok:
      return "ok";
    case Status::BadMagic:
      return "bad_magic";
    case Status::BadVersion:
      return "bad_version";
    case Status::BadParams:
      return "bad_params";
    case Status::DimMismatch:
      return "dim_mismatch";
    case Status::InternalError:
      return "internal_error";
  }
  return "unknown";
}

std::uint32_t algorithm_code(Algorithm algorithm) noexcept { return static_cast<std::uint32_t>(algorithm); }

RequestHeader decode_request_header(std::span<const std::byte> bytes) {
  if (bytes.size() < kRequestHeaderBytes) throw WireError(Status::BadMagic, "request header truncated");
  for (std::size_t i = 0; i < kRequestMagic.size(); ++i) {
    if (bytes[i] != static_cast<std::byte>(kRequestMagic[i])) throw WireError(Status::BadMagic, "bad request magic");
  }
  io::ByteReader r(bytes.subspan(4));
  RequestHeader h;
  h.version = r.u32();
  if (h.version != kProtocolVersion) {
    throw WireError(Status::BadVersion, "unsupported protocol version " + std::to_string(h.version));
  }
  h.k = r.u32();
  h.l = r.u32();
  h.algorithm = r.u32();
  h.mg = r.u32();
  h.mc = r.u32();
  h.batch_size = r.u32();
  h.dim = r.u32();
  return h;
}

std::vector<std::byte> encode_request_header(const RequestHeader& h) {
  std::vector<std::byte> out;
  out.reserve(kRequestHeaderBytes);
  for (char c : kRequestMagic) out.push_back(static_cast<std::byte>(c));
  for (std::uint32_t v : {h.version, h.k, h.l, h.algorithm, h.mg, h.mc, h.batch_size, h.dim}) {
    io::append_u32(out, v);
  }
  return out;
}

std::vector<std::byte> encode_request(const Request& request) {
  auto out = encode_request_header(request.header);
  out.reserve(out.size() + request.queries.size() * 4);
  for (float v : request.queries) io::append_f32(out, v);
  return out;
}

Request decode_request(std::span<const std::byte> bytes) {
  Request req;
  req.header = decode_request_header(bytes);
  if (req.header.batch_size == 0 || req.header.dim == 0) {
    throw WireError(Status::BadParams, "batch_size and dim must be >= 1");
  }
  const std::size_t payload = std::size_t{req.header.batch_size} * req.header.dim * 4;
  if (bytes.size() != kRequestHeaderBytes + payload) {
    throw WireError(Status::BadParams, "request length does not match batch_size * dim");
  }
  io::ByteReader r(bytes.subspan(kRequestHeaderBytes));
  req.queries.resize(std::size_t{req.header.batch_size} * req.header.dim);
  for (auto& v : req.queries) v = r.f32();
  return req;
}

void append_response(std::vector<std::byte>& out, const Response& response) {
  io::append_u32(out, response.query_index);
  io::append_u32(out, static_cast<std::uint32_t>(response.status));
  io::append_u32(out, static_cast<std::uint32_t>(response.neighbors.size()));
  for (const auto& n : response.neighbors) {
    io::append_u32(out, n.id);
    io::append_f32(out, n.distance);
  }
}

std::vector<std::byte> encode_response(const Response& response) {
  std::vector<std::byte> out;
  append_response(out, response);
  return out;
}

std::optional<Response> decode_response(std::span<const std::byte> bytes, std::size_t* consumed) {
  if (bytes.size() < kResponseHeaderBytes) return std::nullopt;
  io::ByteReader r(bytes);
  Response resp;
  resp.query_index = r.u32();
  const std::uint32_t status = r.u32();
  if (status > static_cast<std::uint32_t>(Status::InternalError)) {
    throw WireError(Status::InternalError, "unknown response status " + std::to_string(status));
  }
  resp.status = static_cast<Status>(status);
  const std::size_t count = r.u32();
  if (r.remaining() < count * 8) return std::nullopt;
  resp.neighbors.resize(count);
  for (auto& n : resp.neighbors) {
    n.id = r.u32();
    n.distance = r.f32();
  }
  if (consumed) *consumed = r.offset();
  return resp;
}

SearchParams resolve_params(const RequestHeader& header, const SearchParams& defaults) {
  SearchParams p = defaults;
  if (header.algorithm > static_cast<std::uint32_t>(Algorithm::DST)) {
    throw WireError(Status::BadParams, "unknown algorithm code " + std::to_string(header.algorithm));
  }
  p.algorithm = static_cast<Algorithm>(header.algorithm);
  if (header.k != 0) p.k = header.k;
  if (header.l != 0) p.l = header.l;
  if (header.mg != 0) p.mg = header.mg;
  if (header.mc != 0) p.mc = header.mc;
  if (p.algorithm == Algorithm::BFS) p.mg = p.mc = 1;
  if (p.algorithm == Algorithm::MCS) p.mg = 1;
  p.trace = false;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw WireError(Status::BadParams, e.what());
  }
  return p;
}

}  // namespace falcon::wire
