#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cmstress/errors.hpp"

namespace cmstress::csv {

// RFC 4180 record reader. Quoted fields may contain commas, escaped
// quotes ("") and raw newlines; rows end with LF or CRLF (a bare CR also
// terminates a row). A UTF-8 BOM at the start of the stream is stripped.
// Field bytes are otherwise preserved exactly.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads one record into `fields`. Returns false at end of input.
  // Blank lines are skipped.
  bool next(std::vector<std::string>& fields) {
    if (at_start_) {
      strip_bom();
      at_start_ = false;
    }
    for (;;) {
      fields.clear();
      std::string field;
      enum class St { kFieldStart, kUnquoted, kQuoted, kQuoteClosed };
      St st = St::kFieldStart;
      bool quoted_any = false;
      bool got_char = false;
      for (;;) {
        const int ci = get_ch();
        if (ci == kEof) {
          if (!got_char) return false;
          if (st == St::kQuoted) {
            throw MalformedRowError("unterminated quoted field at end of input");
          }
          fields.push_back(std::move(field));
          goto record_done;
        }
        got_char = true;
        const char c = static_cast<char>(ci);
        switch (st) {
          case St::kFieldStart:
            if (c == '"') {
              st = St::kQuoted;
              quoted_any = true;
            } else if (c == ',') {
              fields.emplace_back();
            } else if (c == '\n') {
              fields.emplace_back();
              goto record_done;
            } else if (c == '\r') {
              eat_lf();
              fields.emplace_back();
              goto record_done;
            } else {
              field += c;
              st = St::kUnquoted;
            }
            break;
          case St::kUnquoted:
            if (c == ',') {
              fields.push_back(std::move(field));
              field.clear();
              st = St::kFieldStart;
            } else if (c == '\n') {
              fields.push_back(std::move(field));
              goto record_done;
            } else if (c == '\r') {
              eat_lf();
              fields.push_back(std::move(field));
              goto record_done;
            } else {
              field += c;  // stray quotes inside unquoted fields kept as-is
            }
            break;
          case St::kQuoted:
            if (c == '"') {
              st = St::kQuoteClosed;
            } else {
              field += c;  // raw newlines inside quotes preserved
            }
            break;
          case St::kQuoteClosed:
            if (c == '"') {
              field += '"';  // "" escape
              st = St::kQuoted;
            } else if (c == ',') {
              fields.push_back(std::move(field));
              field.clear();
              st = St::kFieldStart;
            } else if (c == '\n') {
              fields.push_back(std::move(field));
              goto record_done;
            } else if (c == '\r') {
              eat_lf();
              fields.push_back(std::move(field));
              goto record_done;
            } else {
              throw MalformedRowError(
                  "unexpected character after closing quote in record " +
                  std::to_string(records_read_ + 1));
            }
            break;
        }
      }
    record_done:
      if (fields.size() == 1 && fields[0].empty() && !quoted_any) {
        continue;  // blank line
      }
      ++records_read_;
      return true;
    }
  }

  // Count of records returned so far.
  std::size_t records_read() const { return records_read_; }

 private:
  static constexpr int kEof = std::char_traits<char>::eof();

  int get_ch() {
    if (pending_pos_ < pending_.size()) {
      return static_cast<unsigned char>(pending_[pending_pos_++]);
    }
    return in_.get();
  }

  void eat_lf() {
    if (pending_pos_ < pending_.size()) {
      if (pending_[pending_pos_] == '\n') ++pending_pos_;
      return;
    }
    if (in_.peek() == '\n') in_.get();
  }

  // Consumes a UTF-8 BOM if present; any partial match is replayed.
  void strip_bom() {
    static constexpr char kBom[] = "\xEF\xBB\xBF";
    for (int k = 0; k < 3; ++k) {
      const int ci = in_.get();
      if (ci == kEof) return;
      if (static_cast<char>(ci) != kBom[k]) {
        pending_ += static_cast<char>(ci);
        return;
      }
      pending_ += static_cast<char>(ci);
    }
    pending_.clear();  // full BOM, drop it
  }

  std::istream& in_;
  std::string pending_;
  std::size_t pending_pos_ = 0;
  std::size_t records_read_ = 0;
  bool at_start_ = true;
};

inline bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

}  // namespace cmstress::csv
