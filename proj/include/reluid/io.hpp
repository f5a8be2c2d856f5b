#pragma once
// JSON serialization of networks and report helpers.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "json.hpp"

#include "network.hpp"

namespace reluid {

using json = nlohmann::ordered_json;

struct MalformedInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class S>
json scalar_json(const S& x) {
  if constexpr (NumTraits<S>::exact) return NumTraits<S>::to_string(x);
  else return x;
}

template <class S>
json vector_json(const std::vector<S>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(scalar_json(x));
  return a;
}

template <class S>
json to_json(const Params<S>& p) {
  json j;
  j["widths"] = p.arch().widths;
  json W = json::array(), B = json::array();
  for (std::size_t l = 1; l <= p.depth(); ++l) {
    W.push_back(vector_json(p.weights(l).data));
    B.push_back(vector_json(p.bias(l)));
  }
  j["weights"] = std::move(W);
  j["biases"] = std::move(B);
  j["scalar_mode"] = to_string(NumTraits<S>::mode);
  return j;
}

namespace detail {

template <class S>
S parse_entry(const json& e, const std::string& where) {
  try {
    if (e.is_string()) return NumTraits<S>::parse(e.get<std::string>());
    if (e.is_number_integer()) return S(e.get<long>());
    if (e.is_number()) return NumTraits<S>::from_double(e.get<double>());
  } catch (const std::exception& ex) {
    throw MalformedInput("malformed number at " + where + ": " + ex.what());
  }
  throw MalformedInput("expected a number or \"p/q\" string at " + where);
}

}  // namespace detail

template <class S>
Params<S> params_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInput("network JSON must be an object");
  for (const char* key : {"widths", "weights", "biases"})
    if (!j.contains(key) || !j[key].is_array()) throw MalformedInput(std::string("network JSON lacks array \"") + key + "\"");
  std::vector<std::size_t> widths;
  for (const auto& w : j["widths"]) {
    if (!w.is_number_unsigned() || w.get<std::size_t>() == 0) throw MalformedInput("widths must be positive integers");
    widths.push_back(w.get<std::size_t>());
  }
  if (widths.size() < 2) throw ShapeError("network needs at least an input and an output layer");
  Params<S> p{Architecture(widths)};
  const std::size_t L = p.depth();
  if (j["weights"].size() != L || j["biases"].size() != L)
    throw ShapeError("expected " + std::to_string(L) + " weight and bias layers");
  for (std::size_t l = 1; l <= L; ++l) {
    const auto& W = j["weights"][l - 1];
    const auto& B = j["biases"][l - 1];
    auto& pw = p.weights(l);
    if (!W.is_array() || W.size() != pw.data.size())
      throw ShapeError("layer " + std::to_string(l) + " weights: expected " + std::to_string(pw.data.size()) + " entries");
    if (!B.is_array() || B.size() != p.bias(l).size())
      throw ShapeError("layer " + std::to_string(l) + " biases: expected " + std::to_string(p.bias(l).size()) + " entries");
    for (std::size_t i = 0; i < W.size(); ++i)
      pw.data[i] = detail::parse_entry<S>(W[i], "weights[" + std::to_string(l - 1) + "][" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < B.size(); ++i)
      p.bias(l)[i] = detail::parse_entry<S>(B[i], "biases[" + std::to_string(l - 1) + "][" + std::to_string(i) + "]");
  }
  return p;
}

using AnyParams = std::variant<Params<Rational>, Params<double>>;

inline ScalarMode mode_of(const json& j) {
  if (!j.contains("scalar_mode")) return ScalarMode::exact;
  const auto& m = j["scalar_mode"];
  if (m == "exact") return ScalarMode::exact;
  if (m == "float" || m == "float64") return ScalarMode::float64;
  throw MalformedInput("scalar_mode must be \"exact\" or \"float\"");
}

inline AnyParams any_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInput("network JSON must be an object");
  if (mode_of(j) == ScalarMode::exact) return params_from_json<Rational>(j);
  return params_from_json<double>(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput("malformed JSON in " + source + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// 64-bit FNV-1a, hex.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace reluid
