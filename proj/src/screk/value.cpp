#include "grouptrack/screk/value.hpp"

#include <array>
#include <stdexcept>

namespace grouptrack::screk {

namespace {

constexpr std::array<std::string_view, basic_type_count> keywords{
    "CSBool",    "CSInt",    "CSDouble", "CSString",  "CSTimestamp",   "CSInterval",
    "CSPoint2I", "CSPoint2D", "CSPoint3I", "CSPoint3D", "CSPoint3DList",
};

std::string format_real(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

bool numeric(BasicType t) { return t == BasicType::Int || t == BasicType::Double || t == BasicType::Timestamp; }

std::optional<double> as_number(const Value& v) {
  if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
  if (auto p = std::get_if<double>(&v)) return *p;
  if (auto p = std::get_if<Timestamp>(&v)) return static_cast<double>(p->frame);
  return std::nullopt;
}

template <typename T>
bool order(const T& a, Comparator c, const T& b) {
  switch (c) {
    case Comparator::Eq: return a == b;
    case Comparator::Ne: return a != b;
    case Comparator::Lt: return a < b;
    case Comparator::Le: return a <= b;
    case Comparator::Gt: return a > b;
    case Comparator::Ge: return a >= b;
  }
  return false;
}

}  // namespace

std::string_view type_keyword(BasicType t) { return keywords[static_cast<std::size_t>(t)]; }

std::optional<BasicType> basic_type_from_keyword(std::string_view keyword) {
  for (std::size_t i = 0; i < keywords.size(); ++i)
    if (keywords[i] == keyword) return static_cast<BasicType>(i);
  return std::nullopt;
}

BasicType type_of(const Value& v) { return static_cast<BasicType>(v.index()); }

std::string format_value(const Value& v) {
  struct Printer {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_real(d); }
    std::string operator()(const std::string& s) const { return quote(s); }
    std::string operator()(Timestamp t) const { return "@" + std::to_string(t.frame); }
    std::string operator()(FrameInterval i) const {
      return "@[" + std::to_string(i.start) + "," + std::to_string(i.end) + "]";
    }
    std::string operator()(Point2I p) const { return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")"; }
    std::string operator()(Point2D p) const { return "(" + format_real(p.x) + "," + format_real(p.y) + ")"; }
    std::string operator()(Point3I p) const {
      return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + "," + std::to_string(p.z) + ")";
    }
    std::string operator()(Point3D p) const {
      return "(" + format_real(p.x) + "," + format_real(p.y) + "," + format_real(p.z) + ")";
    }
    std::string operator()(const Point3DList& l) const {
      std::string s = "[";
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (i) s += ",";
        s += (*this)(l[i]);
      }
      return s + "]";
    }
  };
  return std::visit(Printer{}, v);
}

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::Eq: return "=";
    case Comparator::Ne: return "!=";
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
  }
  return "?";
}

bool comparable(BasicType lhs, Comparator c, BasicType rhs) {
  if (numeric(lhs) && numeric(rhs)) return true;
  if (lhs != rhs) return false;
  if (lhs == BasicType::String) return true;
  return c == Comparator::Eq || c == Comparator::Ne;
}

std::optional<bool> compare(const Value& lhs, Comparator c, const Value& rhs) {
  if (!comparable(type_of(lhs), c, type_of(rhs))) return std::nullopt;
  if (auto a = as_number(lhs)) {
    // exact integer comparison when both sides are integral
    if (!std::holds_alternative<double>(lhs) && !std::holds_alternative<double>(rhs)) {
      auto ia = std::holds_alternative<Timestamp>(lhs) ? std::get<Timestamp>(lhs).frame : std::get<std::int64_t>(lhs);
      auto ib = std::holds_alternative<Timestamp>(rhs) ? std::get<Timestamp>(rhs).frame : std::get<std::int64_t>(rhs);
      return order(ia, c, ib);
    }
    return order(*a, c, *as_number(rhs));
  }
  if (auto s = std::get_if<std::string>(&lhs)) return order(*s, c, std::get<std::string>(rhs));
  const bool eq = lhs == rhs;
  return c == Comparator::Eq ? eq : !eq;
}

History::History(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("history capacity must be positive");
}

void History::record(FrameId frame, Value value) {
  if (!entries_.empty() && entries_.back().first == frame) {
    entries_.back().second = std::move(value);
    return;
  }
  if (!entries_.empty() && frame < entries_.back().first)
    throw std::invalid_argument("history frames must be increasing");
  entries_.emplace_back(frame, std::move(value));
  if (entries_.size() > capacity_) entries_.pop_front();
}

const Value* History::at_or_before(FrameId frame) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first <= frame) return &it->second;
  return nullptr;
}

const Value* History::latest() const { return entries_.empty() ? nullptr : &entries_.back().second; }

}  // namespace grouptrack::screk
