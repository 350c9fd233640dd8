#include "cgap/model_io.hpp"

#include "cgap/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace cgap {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key)
{
  auto it = j.find(key);
  if (it == j.end()) throw SpecParseError(std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get_as(const json& j, const char* key)
{
  try {
    return require(j, key).get<T>();
  } catch (const json::type_error& e) {
    throw SpecParseError(std::string("field '") + key + "' has the wrong type: " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& variant)
{
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw SpecParseError("unknown field '" + key + "' for variant '" + variant + "'");
}

}  // namespace

ModelSpec model_spec_from_json(const json& j)
{
  if (!j.is_object()) throw SpecParseError("model spec must be a JSON object");
  const auto variant = get_as<std::string>(j, "variant");
  const auto n = get_as<std::size_t>(j, "n");

  ModelSpec spec;
  spec.n = n;
  if (variant == "disordered_exclusion") {
    reject_unknown(j, {"variant", "n", "p", "omega"}, variant);
    spec.params = DisorderedExclusion{get_as<std::vector<double>>(j, "p"), get_as<int>(j, "omega")};
  } else if (variant == "colored_exclusion") {
    reject_unknown(j, {"variant", "n", "p", "omega", "m", "gamma"}, variant);
    ColoredExclusion m;
    m.p = get_as<std::vector<double>>(j, "p");
    m.colors = get_as<int>(j, "m");
    m.gamma = j.contains("gamma") ? get_as<int>(j, "gamma") : 1;
    m.counts = get_as<std::vector<int>>(j, "omega");
    spec.params = std::move(m);
  } else if (variant == "biased_permutations") {
    reject_unknown(j, {"variant", "n", "b"}, variant);
    BiasedPermutations m;
    m.bias = j.contains("b") ? get_as<std::vector<std::vector<double>>>(j, "b")
                             : std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0));
    spec.params = std::move(m);
  } else if (variant == "kac_sphere") {
    reject_unknown(j, {"variant", "n", "radius_sq"}, variant);
    spec.params = KacSphere{get_as<double>(j, "radius_sq")};
  } else if (variant == "flat_kac") {
    reject_unknown(j, {"variant", "n", "mass"}, variant);
    spec.params = FlatKac{get_as<double>(j, "mass")};
  } else {
    throw SpecParseError("unknown variant '" + variant + "'");
  }
  spec.validate();
  return spec;
}

json model_spec_to_json(const ModelSpec& spec)
{
  json j;
  j["variant"] = std::string(variant_name(spec.variant()));
  j["n"] = spec.n;
  if (const auto* m = std::get_if<DisorderedExclusion>(&spec.params)) {
    j["p"] = m->p;
    j["omega"] = m->particles;
  } else if (const auto* m = std::get_if<ColoredExclusion>(&spec.params)) {
    j["p"] = m->p;
    j["m"] = m->colors;
    j["gamma"] = m->gamma;
    j["omega"] = m->counts;
  } else if (const auto* m = std::get_if<BiasedPermutations>(&spec.params)) {
    j["b"] = m->bias;
  } else if (const auto* m = std::get_if<KacSphere>(&spec.params)) {
    j["radius_sq"] = m->radius_sq;
  } else if (const auto* m = std::get_if<FlatKac>(&spec.params)) {
    j["mass"] = m->mass;
  }
  return j;
}

ModelSpec parse_model_spec(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" inside what().
    throw SpecParseError(std::string("model spec: ") + e.what());
  }
  return model_spec_from_json(j);
}

ModelSpec load_model_spec(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw SpecParseError("cannot open model spec " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model_spec(buf.str());
  } catch (const SpecParseError& e) {
    throw SpecParseError(path.string() + ": " + e.what());
  }
}

}  // namespace cgap
