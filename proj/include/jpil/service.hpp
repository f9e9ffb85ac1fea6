#pragma once

#include "jpil/config.hpp"
#include "jpil/error.hpp"

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace jpil {

// Headset pose as it arrives from the device.
struct PoseFields {
  Point3 position = Point3::Zero();
  OrientationENU orientation;  // degrees
  std::optional<Vector3> gaze;
};

// Parses "a,b,c". Throws Error(Parse).
Eigen::Vector3d parse_triple(std::string_view text);

// Decodes the session mesh (PLY/OBJ) and the spherical image (PNG) and
// validates the result. Parse errors name the byte offset.
LocalizationRequest load_request(std::span<const std::byte> mesh_bytes,
                                 std::span<const std::byte> image_bytes, const PoseFields& pose);

std::string base64_encode(std::string_view bytes);
// Throws Error(Parse) on characters outside the alphabet.
std::string base64_decode(std::string_view text);

// Length-prefixed binary request, all integers and floats little-endian:
//   "JPL1", u64 mesh size, mesh bytes, u64 image size, image bytes,
//   9 x f64 (position, roll/pitch/yaw in degrees, gaze).
std::string encode_binary_request(std::string_view mesh, std::string_view image,
                                  const PoseFields& pose);

// Response document shared by the CLI (--json) and the service. Transform
// entries are row-major; "transform_bits" carries their IEEE-754 bit patterns
// as hex so clients can compare results exactly.
std::string result_json(const LocalizationResult& result, double elapsed_ms);
std::string error_json(std::string_view code, std::string_view message);
const char* error_code(ErrorKind kind);

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Request handling without the transport. Stateless between requests; the
// reference model is shared read-only.
class LocalizationService {
 public:
  explicit LocalizationService(ServiceConfig cfg);

  // Loads and precomputes the reference. Blocking; call once.
  void prepare();
  void prepare(std::shared_ptr<const ReferenceModel> reference);
  bool ready() const { return ready_.load(); }

  ServiceResponse localize(std::string_view content_type, std::string_view body) const;
  ServiceResponse health() const;
  ServiceResponse config() const;

  const ServiceConfig& settings() const { return cfg_; }

 private:
  ServiceConfig cfg_;
  std::shared_ptr<const ReferenceModel> reference_;
  std::atomic<bool> ready_{false};
  mutable std::mutex failure_mutex_;
  std::string failure_;  // set when prepare() failed
};

// HTTP front end: POST /localize, GET /healthz, GET /config.
class HttpServer {
 public:
  explicit HttpServer(LocalizationService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Serves until stop(). Call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Binds, precomputes the reference in the background while /healthz reports
// 503, then serves until the process is stopped.
int serve_localize(const ServiceConfig& cfg);

}  // namespace jpil
