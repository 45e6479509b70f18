#include "subprompt/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace subprompt {

namespace {

void put_u32(std::ostream& os, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string resolve(const std::string& manifest_path, const std::string& feature_file) {
  fs::path p(feature_file);
  if (p.is_absolute()) return feature_file;
  return (fs::path(manifest_path).parent_path() / p).string();
}

}  // namespace

void write_features(const std::string& path, const Mat& features) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write feature file " + path);
    os.write("SBRF", 4);
    put_u32(os, static_cast<std::uint32_t>(features.rows));
    put_u32(os, static_cast<std::uint32_t>(features.cols));
    for (double d : features.v) {
      float f = static_cast<float>(d);
      static_assert(sizeof(float) == 4);
      os.write(reinterpret_cast<const char*>(&f), 4);
    }
  }
  fs::rename(tmp, path);
}

Mat read_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("missing feature file " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "SBRF")
    throw std::runtime_error("bad feature file magic in " + path);
  std::uint32_t n = get_u32(is);
  std::uint32_t d = get_u32(is);
  if (!is) throw std::runtime_error("truncated feature header in " + path);
  Mat m(n, d);
  for (std::size_t i = 0; i < m.size(); ++i) {
    float f;
    is.read(reinterpret_cast<char*>(&f), 4);
    if (!is) throw std::runtime_error("feature file " + path + " truncated: header declares " +
                                      std::to_string(n) + "x" + std::to_string(d));
    m.v[i] = f;
  }
  is.peek();
  if (!is.eof()) throw std::runtime_error("feature file " + path + " has trailing bytes");
  return m;
}

std::vector<Utterance> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest " + path);
  std::vector<Utterance> utts;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("manifest " + path + " line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    Utterance u;
    u.id = j.at("id").get<std::string>();
    u.subtitle = j.value("subtitle", "");
    u.pseudo_transcript = j.value("pseudo_transcript", "");
    if (j.contains("reference") && !j["reference"].is_null())
      u.reference = j["reference"].get<std::string>();
    u.duration_ms = j.at("duration_ms").get<std::int64_t>();
    u.feature_file = j.at("feature_file").get<std::string>();
    try {
      u.features = read_features(resolve(path, u.feature_file));
    } catch (const std::exception& e) {
      throw std::runtime_error("utterance " + u.id + ": " + e.what());
    }
    for (double d : u.features.v)
      if (std::isnan(d)) throw std::runtime_error("utterance " + u.id + ": NaN in features");
    if (u.features.rows < 1) throw std::runtime_error("utterance " + u.id + ": empty features");
    utts.push_back(std::move(u));
  }
  return utts;
}

void write_manifest(const std::vector<Utterance>& utts, const std::string& path) {
  fs::path dir = fs::path(path).parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  std::ostringstream os;
  for (const auto& u : utts) {
    std::string feature_file = u.feature_file.empty() ? u.id + ".sbrf" : u.feature_file;
    write_features(resolve(path, feature_file), u.features);
    json j;
    j["id"] = u.id;
    j["subtitle"] = u.subtitle;
    j["pseudo_transcript"] = u.pseudo_transcript;
    if (u.reference) j["reference"] = *u.reference;
    j["duration_ms"] = u.duration_ms;
    j["feature_file"] = feature_file;
    os << j.dump() << "\n";
  }
  write_file_atomic(path, os.str());
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace subprompt
