#include "sublift/imageio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sublift {

namespace {

[[noreturn]] void parse_fail(const std::string& path, size_t offset, const char* what) {
  std::ostringstream os;
  os << "read_pgm: " << what << " in '" << path << "' at byte " << offset;
  throw ConfigError(os.str());
}

struct Cursor {
  const std::string& data;
  size_t pos = 0;
};

// skip whitespace and '#' comment lines
void skip_space(Cursor& c) {
  while (c.pos < c.data.size()) {
    const char ch = c.data[c.pos];
    if (ch == '#') {
      while (c.pos < c.data.size() && c.data[c.pos] != '\n') ++c.pos;
    } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      ++c.pos;
    } else {
      break;
    }
  }
}

long read_int(Cursor& c, const std::string& path, const char* what) {
  skip_space(c);
  const size_t start = c.pos;
  long value = 0;
  while (c.pos < c.data.size() && c.data[c.pos] >= '0' && c.data[c.pos] <= '9') {
    value = value * 10 + (c.data[c.pos] - '0');
    if (value > 1000000000L) parse_fail(path, start, "oversized integer");
    ++c.pos;
  }
  if (c.pos == start) parse_fail(path, start, what);
  return value;
}

}  // namespace

ScalarField read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("read_pgm: cannot open '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Cursor c{data};
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '2' && data[1] != '5'))
    parse_fail(path, 0, "unsupported magic (need P2 or P5)");
  const bool binary = data[1] == '5';
  c.pos = 2;
  const long width = read_int(c, path, "missing width");
  const long height = read_int(c, path, "missing height");
  const long maxval = read_int(c, path, "missing maxval");
  if (width < 1 || height < 1) parse_fail(path, c.pos, "bad dimensions");
  if (maxval < 1 || maxval > 65535) parse_fail(path, c.pos, "maxval out of range");

  ScalarField img{int(width), int(height)};
  const size_t count = size_t(width) * size_t(height);
  if (binary) {
    if (c.pos >= data.size()) parse_fail(path, c.pos, "missing payload");
    ++c.pos;  // single whitespace after header
    const int bytes = maxval > 255 ? 2 : 1;
    if (data.size() - c.pos < count * bytes) parse_fail(path, data.size(), "truncated payload");
    for (size_t i = 0; i < count; ++i) {
      unsigned v = (unsigned char)data[c.pos++];
      if (bytes == 2) v = (v << 8) | (unsigned char)data[c.pos++];
      if (v > unsigned(maxval)) parse_fail(path, c.pos - bytes, "sample exceeds maxval");
      img[i] = double(v) / double(maxval);
    }
  } else {
    for (size_t i = 0; i < count; ++i) {
      const long v = read_int(c, path, "truncated payload");
      if (v > maxval) parse_fail(path, c.pos, "sample exceeds maxval");
      img[i] = double(v) / double(maxval);
    }
  }
  return img;
}

void write_pgm(const ScalarField& img, const std::string& path, int maxval) {
  if (maxval < 1 || maxval > 65535) throw ConfigError("write_pgm: maxval out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_pgm: cannot open '" + path + "'");
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  const int bytes = maxval > 255 ? 2 : 1;
  std::string payload;
  payload.reserve(size_t(img.npix()) * bytes);
  for (int i = 0; i < img.npix(); ++i) {
    const double clamped = std::clamp(img[i], 0.0, 1.0);
    const unsigned v = unsigned(std::floor(clamped * maxval + 0.5));
    if (bytes == 2) payload.push_back(char((v >> 8) & 0xff));
    payload.push_back(char(v & 0xff));
  }
  out.write(payload.data(), std::streamsize(payload.size()));
  if (!out) throw ConfigError("write_pgm: write failed for '" + path + "'");
}

namespace {

std::string fmt_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_metrics: cannot open '" + path + "'");
  out << "k,mode,data_energy,tv_energy,fidelity,noninteg_count,solver_iters,wall_ms,"
         "diff_to_classic\n";
  for (const MetricsRow& r : rows) {
    out << r.k << ',' << r.mode << ',' << fmt_g12(r.data_energy) << ',' << fmt_g12(r.tv_energy)
        << ',' << fmt_g12(r.fidelity) << ',' << r.noninteg_count << ',' << r.solver_iters << ','
        << fmt_g12(r.wall_ms) << ',';
    if (r.diff_to_classic) out << fmt_g12(*r.diff_to_classic);
    out << '\n';
  }
  if (!out) throw ConfigError("write_metrics: write failed for '" + path + "'");
}

void write_manifest(const std::map<std::string, std::string>& kv, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_manifest: cannot open '" + path + "'");
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw ConfigError("write_manifest: write failed for '" + path + "'");
}

}  // namespace sublift
