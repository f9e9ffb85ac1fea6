#include "jpil/service.hpp"
#include "jpil/error.hpp"
#include "jpil/mesh_io.hpp"

#include <boost/beast/core/detail/base64.hpp>
#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstring>
#include <iostream>
#include <thread>

namespace jpil {

using nlohmann::json;

namespace {

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return 400;
    case ErrorKind::Validation:
    case ErrorKind::Degenerate:
    case ErrorKind::NoRegistration: return 422;
    case ErrorKind::Internal: return 500;
  }
  return 500;
}

ServiceResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, "application/json", error_json(code, message)};
}

Eigen::Vector3d json_triple(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw Error(ErrorKind::Parse, std::string("missing field '") + key + "'");
  if (!it->is_array() || it->size() != 3) {
    throw Error(ErrorKind::Parse, std::string("field '") + key + "' must hold 3 numbers");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number()) {
      throw Error(ErrorKind::Parse, std::string("field '") + key + "' must hold 3 numbers");
    }
    v[i] = (*it)[i].get<double>();
  }
  return v;
}

std::string json_payload(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    throw Error(ErrorKind::Parse, std::string("missing base64 field '") + key + "'");
  }
  try {
    return base64_decode(it->get_ref<const std::string&>());
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T take(std::string_view body, std::size_t& pos) {
  if (body.size() - pos < sizeof(T)) {
    throw Error(ErrorKind::Parse, "binary request truncated at byte " + std::to_string(body.size()));
  }
  T v;
  std::memcpy(&v, body.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string_view take_blob(std::string_view body, std::size_t& pos) {
  const auto n = take<std::uint64_t>(body, pos);
  if (body.size() - pos < n) {
    throw Error(ErrorKind::Parse, "binary request truncated at byte " + std::to_string(body.size()) +
                                      " (payload at byte " + std::to_string(pos) + " declares " +
                                      std::to_string(n) + " bytes)");
  }
  const std::string_view blob = body.substr(pos, n);
  pos += n;
  return blob;
}

std::string hex_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

}  // namespace

Eigen::Vector3d parse_triple(std::string_view text) {
  Eigen::Vector3d v;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v[i]);
    if (ec != std::errc()) {
      throw Error(ErrorKind::Parse, "expected three comma-separated numbers in '" +
                                        std::string(text) + "' at offset " + std::to_string(pos));
    }
    pos = static_cast<std::size_t>(ptr - text.data());
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (i < 2) {
      if (pos >= text.size() || text[pos] != ',') {
        throw Error(ErrorKind::Parse, "expected ',' in '" + std::string(text) + "' at offset " +
                                          std::to_string(pos));
      }
      ++pos;
    }
  }
  if (pos != text.size()) {
    throw Error(ErrorKind::Parse, "trailing characters in '" + std::string(text) + "' at offset " +
                                      std::to_string(pos));
  }
  return v;
}

LocalizationRequest load_request(std::span<const std::byte> mesh_bytes,
                                 std::span<const std::byte> image_bytes, const PoseFields& pose) {
  LocalizationRequest req;
  req.session_mesh = read_mesh(mesh_bytes);
  req.image = decode_image(image_bytes);
  if (!pose.position.allFinite()) throw Error(ErrorKind::Validation, "position must be finite");
  const OrientationENU& q = pose.orientation;
  if (!std::isfinite(q.roll) || !std::isfinite(q.pitch) || !std::isfinite(q.yaw)) {
    throw Error(ErrorKind::Validation, "orientation must be finite");
  }
  req.state.position = pose.position;
  req.state.orientation = OrientationENU::normalized(q.roll, q.pitch, q.yaw);
  if (pose.gaze) {
    const double n = pose.gaze->norm();
    if (!(n > 0) || !std::isfinite(n)) throw Error(ErrorKind::Validation, "gaze must be non-zero");
    req.state.gaze = *pose.gaze / n;
  } else {
    req.state.gaze = req.state.orientation.rotation() * Vector3::UnitY();
  }
  req.validate();
  return req;
}

std::string base64_encode(std::string_view bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::string base64_decode(std::string_view text) {
  namespace b64 = boost::beast::detail::base64;
  std::string_view body = text;
  while (!body.empty() && body.back() == '=') body.remove_suffix(1);
  std::string out(b64::decoded_size(text.size()), '\0');
  const auto [written, read] = b64::decode(out.data(), body.data(), body.size());
  if (read != body.size()) {
    throw Error(ErrorKind::Parse, "invalid base64 character at offset " + std::to_string(read));
  }
  out.resize(written);
  return out;
}

std::string encode_binary_request(std::string_view mesh, std::string_view image,
                                  const PoseFields& pose) {
  std::string out = "JPL1";
  auto put = [&out](const auto& v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
  put(static_cast<std::uint64_t>(mesh.size()));
  out.append(mesh);
  put(static_cast<std::uint64_t>(image.size()));
  out.append(image);
  const Vector3 gaze = pose.gaze.value_or(Vector3::Zero());
  for (double v : {pose.position.x(), pose.position.y(), pose.position.z(), pose.orientation.roll,
                   pose.orientation.pitch, pose.orientation.yaw, gaze.x(), gaze.y(), gaze.z()}) {
    put(v);
  }
  return out;
}

const char* error_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NoRegistration: return "no-registration";
    case ErrorKind::Internal: return "internal";
  }
  return "internal";
}

std::string result_json(const LocalizationResult& result, double elapsed_ms) {
  const Eigen::Matrix4d m = result.transform.matrix();
  json values = json::array();
  json bits = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      values.push_back(m(r, c));
      bits.push_back(hex_bits(m(r, c)));
    }
  }
  json candidates = json::array();
  for (const CandidateReport& c : result.candidates) {
    json item = {{"align_cost", c.align_cost},
                 {"matches", c.matches},
                 {"evaluated", c.evaluated},
                 {"correspondences", c.correspondences},
                 {"confident", c.confident}};
    if (c.estimate) {
      item["inliers"] = c.estimate->inliers;
      item["c_image"] = c.c_image;
    }
    candidates.push_back(item);
  }
  const Point3& x = result.headset_position_ref;
  const json doc = {{"transform", values},
                    {"transform_bits", bits},
                    {"gate", to_string(result.gate)},
                    {"candidate_count", result.candidate_count},
                    {"chosen", result.chosen},
                    {"headset_position", {x.x(), x.y(), x.z()}},
                    {"candidates", candidates},
                    {"timing_ms", elapsed_ms}};
  return doc.dump();
}

std::string error_json(std::string_view code, std::string_view message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

LocalizationService::LocalizationService(ServiceConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void LocalizationService::prepare() {
  try {
    TriangleMesh mesh = read_mesh(cfg_.reference_path);
    prepare(ReferenceModel::prepare(std::move(mesh), cfg_.jpil, cfg_.cache_dir));
  } catch (const std::exception& e) {
    std::lock_guard lock(failure_mutex_);
    failure_ = e.what();
    throw;
  }
}

void LocalizationService::prepare(std::shared_ptr<const ReferenceModel> reference) {
  reference_ = std::move(reference);
  ready_.store(true);
}

ServiceResponse LocalizationService::health() const {
  if (ready()) return {200, "application/json", json{{"status", "ready"}}.dump()};
  std::lock_guard lock(failure_mutex_);
  if (!failure_.empty()) {
    return {500, "application/json", json{{"status", "failed"}, {"message", failure_}}.dump()};
  }
  return {503, "application/json", json{{"status", "starting"}}.dump()};
}

ServiceResponse LocalizationService::config() const {
  return {200, "text/plain", format_config(cfg_)};
}

ServiceResponse LocalizationService::localize(std::string_view content_type,
                                              std::string_view body) const {
  if (!ready()) return error_response(503, "not-ready", "reference model is still being prepared");
  const auto start = std::chrono::steady_clock::now();
  try {
    std::string mesh;
    std::string image;
    PoseFields pose;
    if (content_type.starts_with("application/octet-stream")) {
      if (body.size() < 4 || body.substr(0, 4) != "JPL1") {
        throw Error(ErrorKind::Parse, "bad binary request magic at byte 0");
      }
      std::size_t pos = 4;
      mesh = std::string(take_blob(body, pos));
      image = std::string(take_blob(body, pos));
      double v[9];
      for (double& x : v) x = take<double>(body, pos);
      if (pos != body.size()) {
        throw Error(ErrorKind::Parse, "trailing bytes in binary request at byte " + std::to_string(pos));
      }
      pose.position = {v[0], v[1], v[2]};
      pose.orientation = {v[3], v[4], v[5]};
      if (v[6] != 0 || v[7] != 0 || v[8] != 0) pose.gaze = Vector3(v[6], v[7], v[8]);
    } else {
      json doc;
      try {
        doc = json::parse(body);
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, "malformed JSON at byte " + std::to_string(e.byte));
      }
      if (!doc.is_object()) throw Error(ErrorKind::Parse, "request must be a JSON object");
      mesh = json_payload(doc, "session_mesh");
      image = json_payload(doc, "image");
      pose.position = json_triple(doc, "position");
      const Eigen::Vector3d q = json_triple(doc, "orientation");
      pose.orientation = {q[0], q[1], q[2]};
      if (doc.contains("gaze")) pose.gaze = json_triple(doc, "gaze");
    }
    const LocalizationRequest req = load_request(as_bytes(mesh), as_bytes(image), pose);
    const LocalizationResult result = jpil::jpil(*reference_, req, cfg_.jpil);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return {200, "application/json", result_json(result, ms)};
  } catch (const Error& e) {
    return error_response(http_status(e.kind()), error_code(e.kind()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(LocalizationService& service) : impl_(std::make_unique<Impl>()) {
  auto send = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  const int threads = service.settings().threads;
  impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  impl_->server.set_payload_max_length(std::size_t{1} << 30);
  impl_->server.Post("/localize", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.localize(req.get_header_value("Content-Type"), req.body));
  });
  impl_->server.Get("/healthz", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.health());
  });
  impl_->server.Get("/config", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.config());
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

int serve_localize(const ServiceConfig& cfg) {
  LocalizationService service(cfg);
  HttpServer server(service);
  const int port = server.bind(cfg.host, cfg.port);
  if (port < 0) {
    std::cerr << "cannot bind " << cfg.host << ":" << cfg.port << "\n";
    return 1;
  }
  std::cerr << "listening on " << cfg.host << ":" << port << ", preparing reference\n";
  std::thread precompute([&service] {
    try {
      service.prepare();
      std::cerr << "reference ready\n";
    } catch (const std::exception& e) {
      std::cerr << "reference preparation failed: " << e.what() << "\n";
    }
  });
  server.run();
  precompute.join();
  return 0;
}

}  // namespace jpil
