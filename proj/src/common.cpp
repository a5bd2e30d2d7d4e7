#include "ickem/common.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace ickem {
namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  void skip() { ++pos_; }

  int digits(std::size_t count) {
    if (pos_ + count > text_.size()) fail();
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const char c = text_[pos_ + i];
      if (!std::isdigit(static_cast<unsigned char>(c))) fail();
      value = value * 10 + (c - '0');
    }
    pos_ += count;
    return value;
  }

  void expect(char c) {
    if (peek() != c) fail();
    ++pos_;
  }

  [[noreturn]] void fail() const {
    throw ValidationError(fmt::format("invalid ISO-8601 timestamp '{}'", text_));
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

TimePoint parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  Cursor cur(text);
  const int y = cur.digits(4);
  cur.expect('-');
  const int mo = cur.digits(2);
  cur.expect('-');
  const int d = cur.digits(2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) cur.fail();

  int hh = 0, mm = 0, ss = 0;
  if (cur.peek() == 'T' || cur.peek() == 't' || cur.peek() == ' ') {
    cur.skip();
    hh = cur.digits(2);
    cur.expect(':');
    mm = cur.digits(2);
    if (cur.peek() == ':') {
      cur.skip();
      ss = cur.digits(2);
      if (cur.peek() == '.' || cur.peek() == ',') {
        cur.skip();
        if (!std::isdigit(static_cast<unsigned char>(cur.peek()))) cur.fail();
        while (std::isdigit(static_cast<unsigned char>(cur.peek()))) cur.skip();
      }
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) cur.fail();

  int offset_minutes = 0;
  if (cur.peek() == 'Z' || cur.peek() == 'z') {
    cur.skip();
  } else if (cur.peek() == '+' || cur.peek() == '-') {
    const int sign = cur.peek() == '-' ? -1 : 1;
    cur.skip();
    const int oh = cur.digits(2);
    if (cur.peek() == ':') cur.skip();
    const int om = cur.digits(2);
    offset_minutes = sign * (oh * 60 + om);
  }
  if (!cur.done()) cur.fail();

  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
}

std::string format_iso8601(TimePoint tp) {
  using namespace std::chrono;
  const auto day_start = floor<days>(tp);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{tp - day_start};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

bool natural_less(std::string_view a, std::string_view b) {
  const auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && is_digit(a[ie])) ++ie;
      while (je < b.size() && is_digit(b[je])) ++je;
      // compare numerically without overflow: strip zeros, then by length, then lexically
      std::size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      const auto na = a.substr(is, ie - is);
      const auto nb = b.substr(js, je - js);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      if (ie - i != je - j) return ie - i < je - j;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

}  // namespace ickem
