#include "mcse/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mcse/error.hpp"

namespace mcse::config {

namespace {

std::string type_error(const std::string& key, const char* want) {
  return "config key '" + key + "' must be " + want;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '[') ++depth;
    if (c == ']') --depth;
  }
  return depth;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  Value parse_all() {
    Value v = parse_value();
    skip_ws();
    if (pos_ != text_.size()) error("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::kFormat, "config line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= text_.size()) error("missing value");
    const char c = text_[pos_];
    if (c == '[') return parse_array();
    if (c == '"') return parse_string();
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return {true};
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return {false};
    }
    return parse_number();
  }

  Value parse_array() {
    ++pos_;
    Value::Array items;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return {items};
    }
    while (true) {
      items.push_back(parse_value());
      skip_ws();
      if (pos_ >= text_.size()) error("unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {
          ++pos_;
          return {items};
        }
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return {items};
      }
      error("expected ',' or ']' in array");
    }
  }

  Value parse_string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out.push_back(text_[pos_++]);
    }
    if (pos_ >= text_.size()) error("unterminated string");
    ++pos_;
    return {out};
  }

  Value parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+' ||
                                   text_[pos_] == '_')) {
      ++pos_;
    }
    std::string token(text_.substr(start, pos_ - start));
    std::erase(token, '_');
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      error("cannot parse value '" + token + "'");
    }
    return {v};
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

double Value::as_number(const std::string& key) const {
  if (const auto* v = std::get_if<double>(&data)) return *v;
  fail(ErrorCode::kFormat, type_error(key, "a number"));
}

bool Value::as_bool(const std::string& key) const {
  if (const auto* v = std::get_if<bool>(&data)) return *v;
  fail(ErrorCode::kFormat, type_error(key, "true or false"));
}

const std::string& Value::as_string(const std::string& key) const {
  if (const auto* v = std::get_if<std::string>(&data)) return *v;
  fail(ErrorCode::kFormat, type_error(key, "a string"));
}

const Value::Array& Value::as_array(const std::string& key) const {
  if (const auto* v = std::get_if<Array>(&data)) return *v;
  fail(ErrorCode::kFormat, type_error(key, "an array"));
}

Document Document::parse(std::string_view text) {
  Document doc;
  std::istringstream in{std::string(text)};
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') fail(ErrorCode::kFormat, "config line " + std::to_string(line_no) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kFormat, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const int start_line = line_no;
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = line.substr(eq + 1);
    while (bracket_balance(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += " " + strip_comment(raw);
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (doc.entries_.count(full)) {
      fail(ErrorCode::kFormat, "config line " + std::to_string(start_line) + ": duplicate key '" + full + "'");
    }
    doc.entries_[full] = ValueParser(value, start_line).parse_all();
  }
  return doc;
}

Document Document::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Value* Document::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

std::size_t as_count(const Value& v, const std::string& key) {
  const double d = v.as_number(key);
  require(d >= 0.0 && d == static_cast<double>(static_cast<std::size_t>(d)), ErrorCode::kFormat,
          type_error(key, "a non-negative integer"));
  return static_cast<std::size_t>(d);
}

ArrayGeometry geometry_from(const Document& doc, const std::string& prefix, ArrayGeometry g) {
  if (const Value* v = doc.find(prefix + "mic_positions")) {
    const std::string key = prefix + "mic_positions";
    g.mic_positions.clear();
    for (const Value& p : v->as_array(key)) {
      const auto& xyz = p.as_array(key);
      require(xyz.size() == 3, ErrorCode::kFormat, "each microphone position needs 3 coordinates");
      g.mic_positions.push_back({xyz[0].as_number(key), xyz[1].as_number(key), xyz[2].as_number(key)});
    }
  }
  if (const Value* v = doc.find(prefix + "speed_of_sound")) g.speed_of_sound = v->as_number(prefix + "speed_of_sound");
  if (const Value* v = doc.find(prefix + "pdm_excluded")) {
    g.pdm_excluded.clear();
    for (const Value& c : v->as_array(prefix + "pdm_excluded")) {
      g.pdm_excluded.push_back(as_count(c, prefix + "pdm_excluded"));
    }
  }
  return g;
}

}  // namespace

EnhancementConfig to_enhancement_config(const Document& doc) {
  EnhancementConfig cfg;
  std::set<std::string> known;

  auto num = [&](const std::string& key, double& out) {
    known.insert(key);
    if (const Value* v = doc.find(key)) out = v->as_number(key);
  };
  auto count = [&](const std::string& key, std::size_t& out) {
    known.insert(key);
    if (const Value* v = doc.find(key)) out = as_count(*v, key);
  };
  auto flag = [&](const std::string& key, bool& out) {
    known.insert(key);
    if (const Value* v = doc.find(key)) out = v->as_bool(key);
  };
  auto text = [&](const std::string& key, const std::function<void(const std::string&)>& set) {
    known.insert(key);
    if (const Value* v = doc.find(key)) set(v->as_string(key));
  };

  count("stft.window_length", cfg.stft.window_length);
  count("stft.hop", cfg.stft.hop);
  count("stft.fft_size", cfg.stft.fft_size);
  text("stft.window", [&](const std::string& s) { cfg.stft.window = parse_window_type(s); });
  flag("stft.center", cfg.stft.center);

  for (const char* k : {"mic_positions", "speed_of_sound", "pdm_excluded"}) {
    known.insert(std::string("geometry.") + k);
  }
  cfg.geometry = geometry_from(doc, "geometry.", cfg.geometry);

  num("failure.rms_deviation_db", cfg.failure.rms_deviation_db);
  num("failure.min_correlation", cfg.failure.min_correlation);
  double lag_ms = cfg.failure.max_lag_seconds * 1e3;
  num("failure.max_lag_ms", lag_ms);
  cfg.failure.max_lag_seconds = lag_ms * 1e-3;

  num("localizer.azimuth_step_deg", cfg.grid.azimuth_step_deg);
  num("localizer.elevation_min_deg", cfg.grid.elevation_min_deg);
  num("localizer.elevation_max_deg", cfg.grid.elevation_max_deg);
  num("localizer.elevation_step_deg", cfg.grid.elevation_step_deg);
  num("localizer.radius", cfg.grid.radius);

  num("beamformer.noise_fraction", cfg.beamformer.noise_fraction);
  num("beamformer.diagonal_loading", cfg.beamformer.diagonal_loading);

  flag("masks.msc", cfg.masks.msc);
  flag("masks.pdm", cfg.masks.pdm);
  num("masks.floor", cfg.masks.floor);
  count("masks.welch_halfwidth", cfg.masks.welch_halfwidth);

  flag("calibration.enabled", cfg.calibration.enabled);
  text("calibration.stage1", [&](const std::string& s) { cfg.calibration.stage1_path = s; });
  flag("calibration.online", cfg.calibration.online);
  flag("calibration.apply_to_beamformer", cfg.calibration.apply_to_beamformer);

  text("output.encoding", [&](const std::string& s) { cfg.output_encoding = parse_encoding(s); });

  flag("dump.masks", cfg.dump.masks);
  flag("dump.spectrogram", cfg.dump.spectrogram);
  flag("dump.scores", cfg.dump.scores);

  for (const auto& [key, value] : doc.entries()) {
    require(known.count(key) > 0, ErrorCode::kFormat, "unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

EnhancementConfig load_enhancement_config(const std::filesystem::path& path) {
  return to_enhancement_config(Document::load(path));
}

ArrayGeometry load_geometry(const std::filesystem::path& path) {
  const Document doc = Document::load(path);
  const bool sectioned = doc.find("geometry.mic_positions") != nullptr;
  ArrayGeometry g = geometry_from(doc, sectioned ? "geometry." : "", ArrayGeometry{});
  g.validate();
  return g;
}

namespace {

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string emit(const EnhancementConfig& c) {
  std::ostringstream os;
  os << "# Multichannel enhancement configuration. Channel indices are 0-based.\n\n";
  os << "[stft]\n"
     << "window_length = " << c.stft.window_length << "\n"
     << "hop = " << c.stft.hop << "\n"
     << "fft_size = " << c.stft.fft_size << "\n"
     << "window = \"" << to_string(c.stft.window) << "\"  # sqrt_hann | hann\n"
     << "center = " << boolean(c.stft.center) << "\n\n";
  os << "[geometry]\n"
     << "mic_positions = [  # meters\n";
  for (const Vec3& p : c.geometry.mic_positions) {
    os << "  [" << fmt(p.x) << ", " << fmt(p.y) << ", " << fmt(p.z) << "],\n";
  }
  os << "]\n"
     << "speed_of_sound = " << fmt(c.geometry.speed_of_sound) << "\n"
     << "pdm_excluded = [";
  for (std::size_t i = 0; i < c.geometry.pdm_excluded.size(); ++i) {
    os << (i ? ", " : "") << c.geometry.pdm_excluded[i];
  }
  os << "]\n\n";
  os << "[failure]\n"
     << "rms_deviation_db = " << fmt(c.failure.rms_deviation_db) << "\n"
     << "min_correlation = " << fmt(c.failure.min_correlation) << "\n"
     << "max_lag_ms = " << fmt(c.failure.max_lag_seconds * 1e3) << "\n\n";
  os << "[localizer]\n"
     << "azimuth_step_deg = " << fmt(c.grid.azimuth_step_deg) << "\n"
     << "elevation_min_deg = " << fmt(c.grid.elevation_min_deg) << "\n"
     << "elevation_max_deg = " << fmt(c.grid.elevation_max_deg) << "\n"
     << "elevation_step_deg = " << fmt(c.grid.elevation_step_deg) << "\n"
     << "radius = " << fmt(c.grid.radius) << "\n\n";
  os << "[beamformer]\n"
     << "noise_fraction = " << fmt(c.beamformer.noise_fraction) << "\n"
     << "diagonal_loading = " << fmt(c.beamformer.diagonal_loading) << "\n\n";
  os << "[masks]\n"
     << "msc = " << boolean(c.masks.msc) << "\n"
     << "pdm = " << boolean(c.masks.pdm) << "\n"
     << "floor = " << fmt(c.masks.floor) << "\n"
     << "welch_halfwidth = " << c.masks.welch_halfwidth << "\n\n";
  os << "[calibration]\n"
     << "enabled = " << boolean(c.calibration.enabled) << "\n"
     << "stage1 = \"" << c.calibration.stage1_path << "\"\n"
     << "online = " << boolean(c.calibration.online) << "\n"
     << "apply_to_beamformer = " << boolean(c.calibration.apply_to_beamformer) << "\n\n";
  os << "[output]\n"
     << "encoding = \"" << (c.output_encoding == SampleEncoding::kPcm16 ? "pcm16" : "float32")
     << "\"  # pcm16 | float32\n\n";
  os << "[dump]\n"
     << "masks = " << boolean(c.dump.masks) << "\n"
     << "spectrogram = " << boolean(c.dump.spectrogram) << "\n"
     << "scores = " << boolean(c.dump.scores) << "\n";
  return os.str();
}

}  // namespace mcse::config
