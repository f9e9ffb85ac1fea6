#include "jpil/config.hpp"
#include "jpil/error.hpp"
#include "jpil/mesh_io.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>

namespace jpil {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Value {
  std::string_view text;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse, "config line " + std::to_string(line) + ": " + what);
  }

  double number() const {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) fail("expected a number");
    return v;
  }
  std::int64_t integer() const {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) fail("expected an integer");
    return v;
  }
  bool boolean() const {
    if (text == "true") return true;
    if (text == "false") return false;
    fail("expected true or false");
  }
  std::string string() const {
    if (text.size() < 2 || text.front() != '"' || text.back() != '"') fail("expected a quoted string");
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) {
        ++i;
        out += text[i] == 'n' ? '\n' : text[i];
      } else {
        out += text[i];
      }
    }
    return out;
  }
};

using Setter = std::function<void(ServiceConfig&, const Value&, const std::filesystem::path&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"reference_path", [](ServiceConfig& c, const Value& v, const std::filesystem::path& base) {
         c.reference_path = base / v.string();
       }},
      {"cache_dir", [](ServiceConfig& c, const Value& v, const std::filesystem::path& base) {
         const std::string s = v.string();
         c.cache_dir = s.empty() ? std::filesystem::path{} : base / s;
       }},
      {"host", [](ServiceConfig& c, const Value& v, const auto&) { c.host = v.string(); }},
      {"port", [](ServiceConfig& c, const Value& v, const auto&) { c.port = static_cast<int>(v.integer()); }},
      {"threads", [](ServiceConfig& c, const Value& v, const auto&) { c.threads = static_cast<int>(v.integer()); }},
      {"sample_density", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.sample_density = v.number(); }},
      {"seed", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.seed = static_cast<std::uint64_t>(v.integer()); }},
      {"r_scale", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.keypoints.r_scale = v.number(); }},
      {"k_ratio", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.keypoints.k_ratio = v.number(); }},
      {"min_curvature", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.keypoints.min_curvature = v.number(); }},
      {"n_r", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.tbsc.n_r = static_cast<int>(v.integer()); }},
      {"n_a", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.tbsc.n_a = static_cast<int>(v.integer()); }},
      {"desc_radius", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.desc_radius = v.number(); }},
      {"eps_desc", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.eps_desc = v.number(); }},
      {"eps_clust", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.cluster.eps_clust = v.number(); }},
      {"min_cluster", [](ServiceConfig& c, const Value& v, const auto&) {
         c.jpil.cluster.min_cluster = static_cast<std::size_t>(v.integer());
       }},
      {"render_width", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.render.width = static_cast<int>(v.integer()); }},
      {"render_height", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.render.height = static_cast<int>(v.integer()); }},
      {"sigma_kernel", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.sigma_kernel = static_cast<int>(v.integer()); }},
      {"eps_sigma", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.eps_sigma = v.number(); }},
      {"eps_q", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.eps_q = v.number(); }},
      {"eps_plus", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.eps_plus = v.number(); }},
      {"ransac_iters", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.ransac.iterations = static_cast<int>(v.integer()); }},
      {"ransac_thresh", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.ransac.inlier_threshold = v.number(); }},
      {"ransac_seed", [](ServiceConfig& c, const Value& v, const auto&) {
         c.jpil.ransac.seed = static_cast<std::uint64_t>(v.integer());
       }},
      {"orb_features", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.orb.max_features = static_cast<int>(v.integer()); }},
      {"orb_fast_threshold", [](ServiceConfig& c, const Value& v, const auto&) {
         c.jpil.orb.fast_threshold = static_cast<int>(v.integer());
       }},
      {"orb_max_distance", [](ServiceConfig& c, const Value& v, const auto&) {
         c.jpil.orb.max_distance = static_cast<int>(v.integer());
       }},
      {"image_gate", [](ServiceConfig& c, const Value& v, const auto&) { c.jpil.image_gate = v.boolean(); }},
  };
  return table;
}

}  // namespace

void ServiceConfig::validate() const {
  jpil.validate();
  if (port < 0 || port > 65535) throw Error(ErrorKind::Validation, "port out of range");
  if (threads < 1) throw Error(ErrorKind::Validation, "threads must be >= 1");
}

ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ServiceConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    // Strip comments outside quoted strings.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unterminated section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const Value value{trim(line.substr(eq + 1)), line_no};
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unknown key '" +
                                        std::string(key) + "'");
    }
    it->second(cfg, value, base_dir);
  }
  cfg.validate();
  return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

std::string format_config(const ServiceConfig& c) {
  const JpilConfig& j = c.jpil;
  std::string out;
  char buf[256];
  auto num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    out += buf;
  };
  auto integer = [&](const char* key, long long v) {
    std::snprintf(buf, sizeof buf, "%s = %lld\n", key, v);
    out += buf;
  };
  auto str = [&](const char* key, const std::string& v) {
    out += key;
    out += " = \"";
    for (char ch : v) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    out += "\"\n";
  };
  out += "[service]\n";
  str("reference_path", c.reference_path.string());
  str("cache_dir", c.cache_dir.string());
  str("host", c.host);
  integer("port", c.port);
  integer("threads", c.threads);
  out += "\n[model]\n";
  num("sample_density", j.sample_density);
  integer("seed", static_cast<long long>(j.seed));
  num("r_scale", j.keypoints.r_scale);
  num("k_ratio", j.keypoints.k_ratio);
  num("min_curvature", j.keypoints.min_curvature);
  integer("n_r", j.tbsc.n_r);
  integer("n_a", j.tbsc.n_a);
  num("desc_radius", j.desc_radius);
  num("eps_desc", j.eps_desc);
  num("eps_clust", j.cluster.eps_clust);
  integer("min_cluster", static_cast<long long>(j.cluster.min_cluster));
  out += "\n[camera]\n";
  integer("render_width", j.render.width);
  integer("render_height", j.render.height);
  integer("sigma_kernel", j.sigma_kernel);
  num("eps_sigma", j.eps_sigma);
  num("eps_q", j.eps_q);
  num("eps_plus", j.eps_plus);
  integer("ransac_iters", j.ransac.iterations);
  num("ransac_thresh", j.ransac.inlier_threshold);
  integer("ransac_seed", static_cast<long long>(j.ransac.seed));
  integer("orb_features", j.orb.max_features);
  integer("orb_fast_threshold", j.orb.fast_threshold);
  integer("orb_max_distance", j.orb.max_distance);
  out += std::string("image_gate = ") + (j.image_gate ? "true" : "false") + "\n";
  return out;
}

}  // namespace jpil
