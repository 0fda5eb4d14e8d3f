#include "grouptrack/classifier.hpp"

#include "text_util.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace grouptrack {

void ClassModel::validate() const {
  for (const auto& d : dims) {
    if (!(d.sigma > 0)) throw std::invalid_argument("class model sigma must be positive");
    if (!(d.min <= d.mean && d.mean <= d.max)) throw std::invalid_argument("class model requires min <= mean <= max");
  }
}

double class_score(const Vec3& size, const ClassModel& model) {
  const std::array<double, 3> v{size.x, size.y, size.z};
  double log_sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& d = model.dims[i];
    if (v[i] < d.min || v[i] > d.max) return 0.0;
    const double z = (v[i] - d.mean) / d.sigma;
    log_sum += -0.5 * z * z;
  }
  return std::exp(log_sum / 3.0);
}

double class_score(const Mobile& m, const ClassModel& model) { return class_score(m.size, model); }

namespace {

int tie_rank(ObjectClass c) {
  switch (c) {
    case ObjectClass::GroupOfPersons: return 0;
    case ObjectClass::Person: return 1;
    case ObjectClass::Noise: return 2;
    case ObjectClass::Unclassified: return 3;
  }
  return 3;
}

}  // namespace

ObjectClass classify(const Vec3& size, std::span<const ClassModel> models) {
  ObjectClass best = ObjectClass::Noise;
  double best_score = 0.0;
  for (const auto& m : models) {
    const double s = class_score(size, m);
    if (s <= 0.0) continue;
    if (s > best_score || (s == best_score && tie_rank(m.cls) < tie_rank(best))) {
      best = m.cls;
      best_score = s;
    }
  }
  return best;
}

ObjectClass classify(const Mobile& m, std::span<const ClassModel> models) { return classify(m.size, models); }

void classify_all(DetectionStream& stream, std::span<const ClassModel> models) {
  for (auto& f : stream.frames)
    for (auto& m : f.mobiles) m.cls = classify(m, models);
}

std::vector<ClassModel> default_class_models() {
  return {
      {ObjectClass::Person, {{{0.5, 0.2, 0.2, 1.0}, {0.5, 0.2, 0.2, 1.0}, {1.7, 0.3, 1.2, 2.2}}}},
      {ObjectClass::GroupOfPersons, {{{1.5, 0.6, 0.6, 3.0}, {1.5, 0.6, 0.6, 3.0}, {1.7, 0.3, 1.2, 2.2}}}},
      {ObjectClass::Noise, {{{0.2, 0.2, 0.01, 0.6}, {0.2, 0.2, 0.01, 0.6}, {0.4, 0.4, 0.01, 1.2}}}},
  };
}

namespace {

std::array<double, 3> parse_triple(std::string_view text, std::string_view key, std::size_t lineno) {
  auto pos = text.find(std::string(key) + "(");
  if (pos == std::string_view::npos) throw ParseError("missing " + std::string(key) + "(...)", lineno);
  auto open = pos + key.size();
  auto close = text.find(')', open);
  if (close == std::string_view::npos) throw ParseError("unclosed " + std::string(key) + "(", lineno);
  auto parts = detail::split_ws(text.substr(open + 1, close - open - 1));
  if (parts.size() != 3) throw ParseError(std::string(key) + " expects 3 numbers", lineno);
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    auto v = detail::parse_double(parts[i]);
    if (!v) throw ParseError("malformed number '" + std::string(parts[i]) + "'", lineno);
    out[i] = *v;
  }
  return out;
}

}  // namespace

std::vector<ClassModel> parse_class_models(std::istream& in) {
  std::vector<ClassModel> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(detail::strip_comment(line, '#'));
    if (body.empty()) continue;
    auto words = detail::split_ws(body);
    if (words.size() < 2 || words[0] != "class") continue;
    auto cls = object_class_from_string(words[1]);
    if (!cls || *cls == ObjectClass::Unclassified)
      throw ParseError("unknown class '" + std::string(words[1]) + "'", lineno);
    ClassModel m;
    m.cls = *cls;
    auto mean = parse_triple(body, "mean", lineno);
    auto sigma = parse_triple(body, "sigma", lineno);
    auto lo = parse_triple(body, "min", lineno);
    auto hi = parse_triple(body, "max", lineno);
    for (std::size_t i = 0; i < 3; ++i) m.dims[i] = {mean[i], sigma[i], lo[i], hi[i]};
    try {
      m.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
    for (const auto& existing : out)
      if (existing.cls == m.cls) throw ParseError("duplicate class '" + std::string(words[1]) + "'", lineno);
    out.push_back(m);
  }
  return out;
}

std::vector<ClassModel> parse_class_models(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_class_models(in);
}

}  // namespace grouptrack
