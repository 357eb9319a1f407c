// digitvec/container.cc

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "digitvec/container.h"

#include <zlib.h>

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "digitvec/error.h"

namespace digitvec {
namespace {

constexpr const char *kMagic = "digitvec-container";

void CheckName(const std::string &name) {
  if (name.empty()) throw ConfigError("empty container section name");
  for (char c : name)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw ConfigError("container section name '" + name + "' contains whitespace");
}

void AppendLe(std::uint64_t bits, std::string *out) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint64_t ReadLe(const char *p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return bits;
}

std::string Payload(const Container::Section &s) {
  std::string out;
  switch (s.type) {
    case Container::Type::kF64:
      out.reserve(8 * s.f64.size());
      for (double d : s.f64) AppendLe(std::bit_cast<std::uint64_t>(d), &out);
      break;
    case Container::Type::kI64:
      out.reserve(8 * s.i64.size());
      for (std::int64_t v : s.i64) AppendLe(static_cast<std::uint64_t>(v), &out);
      break;
    case Container::Type::kText:
      out = s.text;
      break;
  }
  return out;
}

std::uint32_t Crc32(const std::string &bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in pieces.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef *>(bytes.data() + off),
                static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

Container::Type ParseType(const std::string &s) {
  if (s == "f64") return Container::Type::kF64;
  if (s == "i64") return Container::Type::kI64;
  if (s == "text") return Container::Type::kText;
  throw CorruptBundle("unknown section type '" + s + "'");
}

}  // namespace

std::string_view ContainerTypeName(Container::Type type) {
  switch (type) {
    case Container::Type::kF64: return "f64";
    case Container::Type::kI64: return "i64";
    case Container::Type::kText: return "text";
  }
  return "?";
}

void Container::PutMatrix(const std::string &name, const Matrix &m) {
  CheckName(name);
  Section s;
  s.type = Type::kF64;
  s.rows = m.rows();
  s.cols = m.cols();
  s.f64.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      s.f64[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  sections_[name] = std::move(s);
}

void Container::PutVector(const std::string &name, const Vector &v) {
  CheckName(name);
  Section s;
  s.type = Type::kF64;
  s.rows = v.size();
  s.cols = 1;
  s.f64.assign(v.data(), v.data() + v.size());
  sections_[name] = std::move(s);
}

void Container::PutInts(const std::string &name, const std::vector<std::int64_t> &v) {
  CheckName(name);
  Section s;
  s.type = Type::kI64;
  s.rows = static_cast<std::int64_t>(v.size());
  s.cols = 1;
  s.i64 = v;
  sections_[name] = std::move(s);
}

void Container::PutText(const std::string &name, const std::string &text) {
  CheckName(name);
  Section s;
  s.type = Type::kText;
  s.rows = static_cast<std::int64_t>(text.size());
  s.cols = 1;
  s.text = text;
  sections_[name] = std::move(s);
}

const Container::Section &Container::Get(const std::string &name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw CorruptBundle("missing section '" + name + "'");
  return it->second;
}

Matrix Container::GetMatrix(const std::string &name) const {
  const Section &s = Get(name);
  if (s.type != Type::kF64) throw CorruptBundle("section '" + name + "' is not f64");
  Matrix m(s.rows, s.cols);
  for (std::int64_t r = 0; r < s.rows; ++r)
    for (std::int64_t c = 0; c < s.cols; ++c)
      m(r, c) = s.f64[static_cast<std::size_t>(r * s.cols + c)];
  return m;
}

Vector Container::GetVector(const std::string &name) const {
  const Section &s = Get(name);
  if (s.type != Type::kF64) throw CorruptBundle("section '" + name + "' is not f64");
  return Eigen::Map<const Vector>(s.f64.data(), static_cast<Eigen::Index>(s.f64.size()));
}

std::vector<std::int64_t> Container::GetInts(const std::string &name) const {
  const Section &s = Get(name);
  if (s.type != Type::kI64) throw CorruptBundle("section '" + name + "' is not i64");
  return s.i64;
}

const std::string &Container::GetText(const std::string &name) const {
  const Section &s = Get(name);
  if (s.type != Type::kText) throw CorruptBundle("section '" + name + "' is not text");
  return s.text;
}

std::vector<std::string> Container::Names() const {
  std::vector<std::string> names;
  for (const auto &kv : sections_) names.push_back(kv.first);
  return names;
}

void Container::Write(std::ostream &os) const {
  std::vector<std::string> payloads;
  std::ostringstream header;
  header << kMagic << ' ' << kVersion << '\n'
         << "kind " << kind_ << '\n'
         << "sections " << sections_.size() << '\n';
  for (const auto &[name, s] : sections_) {
    payloads.push_back(Payload(s));
    header << name << ' ' << ContainerTypeName(s.type) << ' ' << s.rows << ' ' << s.cols
           << ' ' << payloads.back().size() << ' ' << std::hex << std::setw(8)
           << std::setfill('0') << Crc32(payloads.back()) << std::dec << std::setfill(' ')
           << '\n';
  }
  header << "end\n";
  os << header.str();
  for (const auto &p : payloads) os.write(p.data(), static_cast<std::streamsize>(p.size()));
  if (!os) throw IoError("failed writing container");
}

Container Container::Read(std::istream &is) {
  std::string line;
  if (!std::getline(is, line)) throw CorruptBundle("empty container");
  {
    std::istringstream ls(line);
    std::string magic;
    int version = -1;
    if (!(ls >> magic >> version) || magic != kMagic)
      throw CorruptBundle("not a digitvec container");
    if (version != kVersion)
      throw VersionError("container version " + std::to_string(version) +
                         ", expected " + std::to_string(kVersion));
  }
  std::string key, kind;
  std::size_t count = 0;
  if (!std::getline(is, line)) throw CorruptBundle("truncated header");
  {
    std::istringstream ls(line);
    if (!(ls >> key) || key != "kind") throw CorruptBundle("missing kind line");
    ls >> kind;
  }
  if (!std::getline(is, line)) throw CorruptBundle("truncated header");
  {
    std::istringstream ls(line);
    if (!(ls >> key >> count) || key != "sections")
      throw CorruptBundle("missing sections line");
  }
  struct Entry {
    std::string name;
    Type type;
    std::int64_t rows, cols;
    std::size_t bytes;
    std::uint32_t crc;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw CorruptBundle("truncated header");
    std::istringstream ls(line);
    Entry e;
    std::string type;
    std::uint32_t crc = 0;
    if (!(ls >> e.name >> type >> e.rows >> e.cols >> e.bytes >> std::hex >> crc))
      throw CorruptBundle("malformed section line '" + line + "'");
    e.type = ParseType(type);
    e.crc = crc;
    if (e.rows < 0 || e.cols < 0) throw CorruptBundle("negative shape in '" + e.name + "'");
    const std::size_t expect =
        e.type == Type::kText ? static_cast<std::size_t>(e.rows)
                              : 8 * static_cast<std::size_t>(e.rows * e.cols);
    if (expect != e.bytes) throw CorruptBundle("size mismatch in '" + e.name + "'");
    entries.push_back(std::move(e));
  }
  if (!std::getline(is, line) || line != "end") throw CorruptBundle("missing header end");

  Container c(kind);
  for (const Entry &e : entries) {
    std::string buf(e.bytes, '\0');
    is.read(buf.data(), static_cast<std::streamsize>(e.bytes));
    if (static_cast<std::size_t>(is.gcount()) != e.bytes)
      throw CorruptBundle("truncated payload in section '" + e.name + "'");
    if (Crc32(buf) != e.crc) throw CorruptBundle("checksum mismatch in section '" + e.name + "'");
    Section s;
    s.type = e.type;
    s.rows = e.rows;
    s.cols = e.cols;
    if (e.type == Type::kText) {
      s.text = std::move(buf);
    } else if (e.type == Type::kF64) {
      s.f64.resize(e.bytes / 8);
      for (std::size_t k = 0; k < s.f64.size(); ++k)
        s.f64[k] = std::bit_cast<double>(ReadLe(buf.data() + 8 * k));
    } else {
      s.i64.resize(e.bytes / 8);
      for (std::size_t k = 0; k < s.i64.size(); ++k)
        s.i64[k] = static_cast<std::int64_t>(ReadLe(buf.data() + 8 * k));
    }
    c.sections_[e.name] = std::move(s);
  }
  return c;
}

void Container::Save(const std::string &path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  Write(os);
  os.close();
  if (!os) throw IoError("failed writing '" + path + "'");
}

Container Container::Load(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return Read(is);
}

}  // namespace digitvec
