#pragma once

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "asclens/fixtures.hpp"
#include "asclens/matrix.hpp"
#include "asclens/rng.hpp"

namespace testing_support {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("asclens-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++count;
  return count;
}

/// Minimal XML well-formedness check: balanced tags, quoted attributes,
/// escaped text and a single root. Returns an empty string on success.
inline std::string xml_problem(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool seen_root = false;
  auto is_name_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.';
  };
  auto check_entities = [](const std::string& text) -> bool {
    for (std::size_t k = 0; k < text.size(); ++k) {
      if (text[k] == '<') return false;
      if (text[k] == '&') {
        const auto semi = text.find(';', k);
        if (semi == std::string::npos) return false;
        const std::string entity = text.substr(k + 1, semi - k - 1);
        if (entity != "amp" && entity != "lt" && entity != "gt" && entity != "quot" && entity != "apos") return false;
      }
    }
    return true;
  };
  while (i < doc.size()) {
    if (doc[i] != '<') {
      const auto next = doc.find('<', i);
      const std::string text = doc.substr(i, next == std::string::npos ? std::string::npos : next - i);
      if (!check_entities(text)) return "bad character data near offset " + std::to_string(i);
      if (stack.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos) {
        return "text outside the root element";
      }
      if (next == std::string::npos) break;
      i = next;
      continue;
    }
    if (doc.compare(i, 5, "<?xml") == 0) {
      if (i != 0) return "XML declaration not at start";
      const auto end = doc.find("?>", i);
      if (end == std::string::npos) return "unterminated declaration";
      i = end + 2;
      continue;
    }
    if (doc.compare(i, 4, "<!--") == 0) {
      const auto end = doc.find("-->", i);
      if (end == std::string::npos) return "unterminated comment";
      i = end + 3;
      continue;
    }
    if (doc.compare(i, 2, "</") == 0) {
      std::size_t j = i + 2;
      while (j < doc.size() && is_name_char(doc[j])) ++j;
      const std::string name = doc.substr(i + 2, j - i - 2);
      while (j < doc.size() && std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
      if (j >= doc.size() || doc[j] != '>') return "malformed end tag " + name;
      if (stack.empty() || stack.back() != name) return "mismatched end tag " + name;
      stack.pop_back();
      i = j + 1;
      continue;
    }
    std::size_t j = i + 1;
    while (j < doc.size() && is_name_char(doc[j])) ++j;
    const std::string name = doc.substr(i + 1, j - i - 1);
    if (name.empty()) return "empty tag name at offset " + std::to_string(i);
    if (stack.empty() && seen_root) return "second root element " + name;
    std::vector<std::string> attributes;
    while (true) {
      while (j < doc.size() && std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
      if (j >= doc.size()) return "unterminated tag " + name;
      if (doc[j] == '>' || doc.compare(j, 2, "/>") == 0) break;
      std::size_t k = j;
      while (k < doc.size() && is_name_char(doc[k])) ++k;
      const std::string attr = doc.substr(j, k - j);
      if (attr.empty() || k >= doc.size() || doc[k] != '=') return "malformed attribute in " + name;
      for (const auto& a : attributes) {
        if (a == attr) return "duplicate attribute " + attr + " in " + name;
      }
      attributes.push_back(attr);
      const char quote = doc[k + 1];
      if (quote != '"' && quote != '\'') return "unquoted attribute " + attr;
      const auto close = doc.find(quote, k + 2);
      if (close == std::string::npos) return "unterminated attribute " + attr;
      if (!check_entities(doc.substr(k + 2, close - k - 2))) return "bad attribute value " + attr;
      j = close + 1;
    }
    seen_root = true;
    if (doc[j] == '/') {
      i = j + 2;
    } else {
      stack.push_back(name);
      i = j + 1;
    }
  }
  if (!stack.empty()) return "unclosed element " + stack.back();
  if (!seen_root) return "no root element";
  return {};
}

/// Gaussian blobs: `per_class` points per class around centers spaced
/// `spacing` apart along successive axes.
inline asclens::Matrix gaussian_blobs(std::size_t classes, std::size_t per_class, std::size_t dims,
                                      double spacing, std::uint64_t seed, std::vector<std::size_t>& labels) {
  asclens::Rng rng(seed);
  asclens::Matrix points(classes * per_class, dims);
  labels.assign(classes * per_class, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = c * per_class + i;
      labels[r] = c;
      for (std::size_t d = 0; d < dims; ++d) {
        points(r, d) = rng.normal() + (d == c % dims ? spacing * static_cast<double>(c / dims + 1) : 0.0);
      }
    }
  }
  return points;
}

/// Small fixture archive used across suites.
inline asclens::FixtureSpec small_fixture(std::uint64_t seed = 11) {
  asclens::FixtureSpec spec;
  spec.sentences_per_class = 20;
  spec.hidden_size = 8;
  spec.n_layers = 3;
  spec.n_heads = 2;
  spec.seed = seed;
  return spec;
}

}  // namespace testing_support
