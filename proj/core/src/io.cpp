#include "grng/io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace grng {

FileFormat format_from_name(const std::string& name) {
  if (name == "fvecs") return FileFormat::Fvecs;
  if (name == "csv") return FileFormat::Csv;
  throw InputError("unknown dataset format '" + name + "' (expected fvecs or csv)");
}

FileFormat format_from_path(const std::string& path) {
  std::string p = path;
  if (p.size() > 3 && p.ends_with(".gz")) p.resize(p.size() - 3);
  if (p.ends_with(".fvecs")) return FileFormat::Fvecs;
  if (p.ends_with(".csv")) return FileFormat::Csv;
  throw InputError("cannot infer format from path '" + path + "'; pass --format");
}

namespace {

std::vector<char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

bool is_gzip(const std::vector<char>& bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::vector<char> gunzip(const std::vector<char>& in, const std::string& path) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw InputError("zlib init failed for '" + path + "'");
  std::vector<char> out;
  out.reserve(in.size() * 4);
  std::vector<char> buf(1 << 16);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf.data());
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw InputError("gzip decompression failed for '" + path + "'");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  }
  inflateEnd(&zs);
  return out;
}

Dataset parse_fvecs(const std::vector<char>& bytes, const std::string& path) {
  Dataset data;
  std::size_t off = 0, record = 0;
  std::size_t dim = 0;
  std::vector<double> p;
  while (off < bytes.size()) {
    if (off + 4 > bytes.size())
      throw InputError(path + ": truncated header of record " + std::to_string(record) +
                       " at byte " + std::to_string(off));
    std::int32_t d;
    std::memcpy(&d, bytes.data() + off, 4);
    off += 4;
    if (d <= 0)
      throw InputError(path + ": non-positive dimension in record " + std::to_string(record));
    if (record == 0) {
      dim = static_cast<std::size_t>(d);
    } else if (static_cast<std::size_t>(d) != dim) {
      throw InputError(path + ": record " + std::to_string(record) + " has dimension " +
                       std::to_string(d) + ", expected " + std::to_string(dim));
    }
    if (off + 4 * dim > bytes.size())
      throw InputError(path + ": truncated record " + std::to_string(record) + " at byte " +
                       std::to_string(off));
    p.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      float f;
      std::memcpy(&f, bytes.data() + off + 4 * k, 4);
      p[k] = static_cast<double>(f);
    }
    off += 4 * dim;
    data.add(p);
    ++record;
  }
  return data;
}

Dataset parse_csv(const std::vector<char>& bytes, const std::string& path) {
  Dataset data;
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> p;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    p.clear();
    bool parse_ok = true;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos);
      char* end = nullptr;
      const char* cstr = field.c_str();
      double v = std::strtod(cstr, &end);
      while (end && *end == ' ') ++end;
      if (end == cstr || (end && *end != '\0')) {
        parse_ok = false;
        break;
      }
      p.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!parse_ok) {
      if (first_data_line) continue;  // header row
      throw InputError(path + ": unparsable value at line " + std::to_string(lineno));
    }
    if (!first_data_line && p.size() != data.dim())
      throw InputError(path + ": line " + std::to_string(lineno) + " has " +
                       std::to_string(p.size()) + " fields, expected " +
                       std::to_string(data.dim()));
    data.add(p);
    first_data_line = false;
  }
  return data;
}

}  // namespace

Dataset load_dataset(const std::string& path, FileFormat format) {
  std::vector<char> bytes = read_file_bytes(path);
  if (is_gzip(bytes)) bytes = gunzip(bytes, path);
  switch (format) {
    case FileFormat::Fvecs: return parse_fvecs(bytes, path);
    case FileFormat::Csv: return parse_csv(bytes, path);
  }
  throw InputError("unreachable format");
}

void save_dataset(const Dataset& data, const std::string& path, FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  if (format == FileFormat::Fvecs) {
    std::int32_t d = static_cast<std::int32_t>(data.dim());
    for (PointId id = 0; id < data.size(); ++id) {
      out.write(reinterpret_cast<const char*>(&d), 4);
      for (double x : data.point(id)) {
        float f = static_cast<float>(x);
        out.write(reinterpret_cast<const char*>(&f), 4);
      }
    }
  } else {
    char buf[64];
    for (PointId id = 0; id < data.size(); ++id) {
      PointView p = data.point(id);
      for (std::size_t k = 0; k < p.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", p[k]);
        out << buf << (k + 1 < p.size() ? "," : "");
      }
      out << '\n';
    }
  }
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace grng
