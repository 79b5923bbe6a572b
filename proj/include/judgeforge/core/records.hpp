#pragma once

#include <concepts>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "judgeforge/core/types.hpp"

namespace judgeforge {

using Json = nlohmann::json;

// Raised by a decoder when a JSON value does not match the schema.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecordError {
  std::size_t line = 0;  // 1-based
  std::string field;
  std::string message;
};

template <class T>
struct ReadResult {
  std::vector<T> records;
  std::vector<RecordError> errors;
};

// Specialize for every persisted type:
//   static constexpr const char* name;
//   static Json encode(const T&);
//   static T decode(const Json&);   // throws SchemaError
// and optionally
//   static const std::string& key(const T&);   // must be unique per file
template <class T>
struct RecordSchema;

namespace json_field {
const Json& require(const Json& j, const char* field);
std::string string(const Json& j, const char* field);
std::string nonempty_string(const Json& j, const char* field);
bool boolean(const Json& j, const char* field);
double number(const Json& j, const char* field);
std::int64_t integer(const Json& j, const char* field);
}  // namespace json_field

namespace detail {
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path);
std::string dump_line(const Json& j);
}  // namespace detail

template <class T>
ReadResult<T> read_records(const std::filesystem::path& path) {
  ReadResult<T> result;
  std::set<std::string> keys;
  const auto lines = detail::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      if (!j.is_object()) throw SchemaError("<record>", "expected a JSON object");
      T rec = RecordSchema<T>::decode(j);
      if constexpr (requires { RecordSchema<T>::key(rec); }) {
        if (!keys.insert(std::string(RecordSchema<T>::key(rec))).second) {
          throw SchemaError("id", "duplicate id '" + std::string(RecordSchema<T>::key(rec)) + "'");
        }
      }
      result.records.push_back(std::move(rec));
    } catch (const SchemaError& e) {
      result.errors.push_back({i + 1, e.field(), e.what()});
    } catch (const Json::exception& e) {
      result.errors.push_back({i + 1, "<json>", e.what()});
    }
  }
  return result;
}

// Reads and throws on the first malformed line.
template <class T>
std::vector<T> read_records_strict(const std::filesystem::path& path) {
  auto result = read_records<T>(path);
  if (!result.errors.empty()) {
    const auto& e = result.errors.front();
    throw SchemaError(e.field, path.string() + ":" + std::to_string(e.line) + ": " + e.message);
  }
  return std::move(result.records);
}

template <class T>
std::size_t write_records(std::span<const T> records, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const T& r : records) lines.push_back(detail::dump_line(RecordSchema<T>::encode(r)));
  detail::write_lines(lines, path);
  return records.size();
}

template <class T>
std::size_t write_records(const std::vector<T>& records, const std::filesystem::path& path) {
  return write_records(std::span<const T>(records), path);
}

Json encode_instruction(const JudgeInstruction& inst);
JudgeInstruction decode_instruction(const Json& j);
Json encode_judgment(const Judgment& j);
Judgment decode_judgment(const Json& j);
Json encode_gen_params(const GenParams& p);
GenParams decode_gen_params(const Json& j);

template <>
struct RecordSchema<QAPair> {
  static constexpr const char* name = "qa_pair";
  static Json encode(const QAPair& r);
  static QAPair decode(const Json& j);
  static const std::string& key(const QAPair& r) { return r.id; }
};

// {"id","instruction","target","meta"}: instruction/target are the trainer
// strings; meta carries the structured provenance.
template <>
struct RecordSchema<SftRecord> {
  static constexpr const char* name = "sft_record";
  static Json encode(const SftRecord& r);
  static SftRecord decode(const Json& j);
  static const std::string& key(const SftRecord& r) { return r.id; }
};

// {"id","instruction","chosen","rejected","meta"}
template <>
struct RecordSchema<DpoRecord> {
  static constexpr const char* name = "dpo_record";
  static Json encode(const DpoRecord& r);
  static DpoRecord decode(const Json& j);
  static const std::string& key(const DpoRecord& r) { return r.id; }
};

template <>
struct RecordSchema<BenchRecord> {
  static constexpr const char* name = "bench_record";
  static Json encode(const BenchRecord& r);
  static BenchRecord decode(const Json& j);
  static const std::string& key(const BenchRecord& r) { return r.id; }
};

}  // namespace judgeforge
