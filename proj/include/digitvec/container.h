// digitvec/container.h

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

#ifndef DIGITVEC_CONTAINER_H_
#define DIGITVEC_CONTAINER_H_

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "digitvec/linalg.h"

namespace digitvec {

/// Named binary sections behind a versioned text header:
///
///   digitvec-container <version>
///   kind <kind>
///   sections <n>
///   <name> <f64|i64|text> <rows> <cols> <bytes> <crc32 hex>
///   ...
///   end
///   <payloads, concatenated in header order>
///
/// Numbers are little-endian IEEE-754 float64 / int64, matrices row-major.
class Container {
 public:
  static constexpr int kVersion = 1;

  enum class Type { kF64, kI64, kText };

  struct Section {
    Type type = Type::kF64;
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<double> f64;
    std::vector<std::int64_t> i64;
    std::string text;
  };

  explicit Container(std::string kind = "generic") : kind_(std::move(kind)) {}

  const std::string &kind() const { return kind_; }

  /// Names must be non-empty and free of whitespace; re-adding replaces.
  void PutMatrix(const std::string &name, const Matrix &m);
  void PutVector(const std::string &name, const Vector &v);
  void PutInts(const std::string &name, const std::vector<std::int64_t> &v);
  void PutText(const std::string &name, const std::string &text);

  bool Has(const std::string &name) const { return sections_.count(name) > 0; }
  /// Throw CorruptBundle for a missing section or a type mismatch.
  Matrix GetMatrix(const std::string &name) const;
  Vector GetVector(const std::string &name) const;
  std::vector<std::int64_t> GetInts(const std::string &name) const;
  const std::string &GetText(const std::string &name) const;

  /// Section names in header order (sorted).
  std::vector<std::string> Names() const;
  const Section &Get(const std::string &name) const;

  void Write(std::ostream &os) const;
  /// Throws VersionError for another version, CorruptBundle for a damaged
  /// header, a short payload or a checksum mismatch.
  static Container Read(std::istream &is);

  void Save(const std::string &path) const;
  static Container Load(const std::string &path);

 private:
  std::string kind_;
  std::map<std::string, Section> sections_;
};

std::string_view ContainerTypeName(Container::Type type);

}  // namespace digitvec

#endif  // DIGITVEC_CONTAINER_H_
