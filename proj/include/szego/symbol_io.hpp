#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "szego/errors.hpp"
#include "szego/multiindex.hpp"
#include "szego/symbol.hpp"

namespace szego {

/// Symbol file contents: the Hermitian recipe and an optional finite-rank part.
struct SymbolFile {
  HermitianSymbol symbol;
  std::optional<CompactPerturbation> perturbation;
};

namespace detail {

/// JSON integers built in code are signed even when non-negative.
inline bool is_non_negative_integer(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return static_cast<std::size_t>(std::count(text.begin(), end, '\n')) + 1;
}

/// Parses JSON, turning syntax errors into ParseError with a line number.
inline nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, line_of_byte(text, e.byte), e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& where,
                           const std::string& source, std::optional<double> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw ParseError(source, 0, where + ": missing field '" + key + "'");
  }
  if (!it->is_number()) throw ParseError(source, 0, where + ": field '" + key + "' must be a number");
  return it->get<double>();
}

inline MultiIndex index_field(const nlohmann::json& obj, const char* key, std::size_t d, const std::string& where,
                              const std::string& source) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) throw ParseError(source, 0, where + ": field '" + key + "' must be an array");
  if (it->size() != d) {
    throw ParseError(source, 0, where + ": '" + key + "' has " + std::to_string(it->size()) + " entries, expected " +
                                    std::to_string(d));
  }
  std::vector<MultiIndex::value_type> exps;
  for (const auto& v : *it) {
    if (!is_non_negative_integer(v)) throw ParseError(source, 0, where + ": '" + key + "' entries must be non-negative integers");
    exps.push_back(v.get<MultiIndex::value_type>());
  }
  return MultiIndex(std::move(exps));
}

}  // namespace detail

/// Builds a symbol from an already parsed JSON document.
inline SymbolFile symbol_from_json(const nlohmann::json& doc, const std::string& source,
                                   HermitianMode mode = HermitianMode::AutoComplete,
                                   const std::string& default_id = "symbol") {
  if (!doc.is_object()) throw ParseError(source, 0, "symbol file must be a JSON object");
  const auto dim_it = doc.find("dimension");
  if (dim_it == doc.end() || !detail::is_non_negative_integer(*dim_it) || dim_it->get<std::size_t>() == 0) {
    throw ParseError(source, 0, "'dimension' must be a positive integer");
  }
  const auto d = dim_it->get<std::size_t>();
  const auto terms_it = doc.find("terms");
  if (terms_it == doc.end() || !terms_it->is_array()) throw ParseError(source, 0, "'terms' must be an array");

  ToeplitzPolynomial poly(d);
  for (std::size_t k = 0; k < terms_it->size(); ++k) {
    const auto& term = (*terms_it)[k];
    const std::string where = "terms[" + std::to_string(k) + "]";
    if (!term.is_object()) throw ParseError(source, 0, where + " must be an object");
    const auto alpha = detail::index_field(term, "alpha", d, where, source);
    const auto beta = detail::index_field(term, "beta", d, where, source);
    const double re = detail::number_field(term, "re", where, source, 0.0);
    const double im = detail::number_field(term, "im", where, source, 0.0);
    poly.add_term(alpha, beta, {re, im});
  }

  std::string id = default_id;
  if (const auto it = doc.find("id"); it != doc.end()) {
    if (!it->is_string()) throw ParseError(source, 0, "'id' must be a string");
    id = it->get<std::string>();
  }

  std::optional<CompactPerturbation> perturbation;
  if (const auto it = doc.find("perturbation"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(source, 0, "'perturbation' must be an array");
    std::vector<CompactPerturbation::Entry> entries;
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& e = (*it)[k];
      const std::string where = "perturbation[" + std::to_string(k) + "]";
      if (!e.is_object()) throw ParseError(source, 0, where + " must be an object");
      for (const char* key : {"row", "col"}) {
        if (!e.contains(key) || !detail::is_non_negative_integer(e[key])) {
          throw ParseError(source, 0, where + ": '" + key + "' must be a non-negative integer");
        }
      }
      entries.push_back({e["row"].get<std::uint64_t>(), e["col"].get<std::uint64_t>(),
                         {detail::number_field(e, "re", where, source, 0.0),
                          detail::number_field(e, "im", where, source, 0.0)}});
    }
    try {
      perturbation = CompactPerturbation(entries, mode);
    } catch (const DomainError& err) {
      throw ParseError(source, 0, err.what());
    }
  }

  try {
    return {HermitianSymbol(std::move(poly), mode, id), std::move(perturbation)};
  } catch (const DomainError& err) {
    throw ParseError(source, 0, err.what());
  }
}

inline SymbolFile parse_symbol(const std::string& text, const std::string& source = "<string>",
                               HermitianMode mode = HermitianMode::AutoComplete) {
  return symbol_from_json(detail::parse_json_text(text, source), source, mode);
}

inline SymbolFile load_symbol(const std::filesystem::path& path, HermitianMode mode = HermitianMode::AutoComplete) {
  const auto text = detail::read_file(path);
  return symbol_from_json(detail::parse_json_text(text, path.string()), path.string(), mode, path.stem().string());
}

/// Writes the symbol back in the file schema (every stored term, conjugates included).
inline nlohmann::json symbol_to_json(const HermitianSymbol& symbol, const CompactPerturbation* perturbation = nullptr) {
  nlohmann::json doc;
  doc["dimension"] = symbol.dimension();
  doc["id"] = symbol.id();
  doc["terms"] = nlohmann::json::array();
  for (const auto& [key, c] : symbol.terms()) {
    const auto a = key.first.exponents();
    const auto b = key.second.exponents();
    doc["terms"].push_back({{"alpha", std::vector<MultiIndex::value_type>(a.begin(), a.end())},
                            {"beta", std::vector<MultiIndex::value_type>(b.begin(), b.end())},
                            {"re", c.real()},
                            {"im", c.imag()}});
  }
  if (perturbation && !perturbation->empty()) {
    doc["perturbation"] = nlohmann::json::array();
    for (const auto& [rc, v] : perturbation->entries()) {
      doc["perturbation"].push_back({{"row", rc.first}, {"col", rc.second}, {"re", v.real()}, {"im", v.imag()}});
    }
  }
  return doc;
}

}  // namespace szego
