#ifndef P2PSCHED_TESTS_SUPPORT_LP_READER_HPP
#define P2PSCHED_TESTS_SUPPORT_LP_READER_HPP

#include <cctype>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal reader for the CPLEX LP subset our exporter emits (Maximize /
// Subject To / Bounds / Binary / End, explicit coefficients on every term).
// Used to verify that exported files mean exactly what the in-memory model
// means.

struct LpBound {
  double lo = 0.0;
  double up = std::numeric_limits<double>::infinity();
};

struct LpConstraintRead {
  std::string name;
  std::map<std::string, double> terms;
  std::string relation;  // "<=", "=", ">="
  double rhs = 0.0;
};

struct LpFileRead {
  std::map<std::string, double> objective;
  double objective_offset = 0.0;
  std::vector<LpConstraintRead> constraints;
  std::map<std::string, LpBound> explicit_bounds;
  std::set<std::string> binaries;
};

namespace lp_reader_detail {

inline bool is_number_token(const std::string& tok) {
  return !tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0])) ||
                          tok[0] == '.');
}

inline double to_number(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error("lp_reader: bad number '" + tok + "'");
  }
  return v;
}

// Parses a `SIGN NUMBER [NAME]` term stream in tokens[pos..end) until a
// relation token or the end; accumulates named terms and bare constants.
inline void parse_terms(const std::vector<std::string>& tokens,
                        std::size_t& pos, std::map<std::string, double>& terms,
                        double& constant) {
  while (pos < tokens.size()) {
    const std::string& tok = tokens[pos];
    if (tok == "<=" || tok == ">=" || tok == "=") return;
    double sign = 1.0;
    if (tok == "+") {
      ++pos;
    } else if (tok == "-") {
      sign = -1.0;
      ++pos;
    } else {
      throw std::runtime_error("lp_reader: expected sign, got '" + tok + "'");
    }
    if (pos >= tokens.size() || !is_number_token(tokens[pos])) {
      throw std::runtime_error("lp_reader: expected coefficient after sign");
    }
    const double coef = sign * to_number(tokens[pos]);
    ++pos;
    if (pos < tokens.size() && !is_number_token(tokens[pos]) &&
        tokens[pos] != "+" && tokens[pos] != "-" && tokens[pos] != "<=" &&
        tokens[pos] != ">=" && tokens[pos] != "=") {
      terms[tokens[pos]] += coef;
      ++pos;
    } else {
      constant += coef;
    }
  }
}

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace lp_reader_detail

inline LpFileRead parse_lp(const std::string& text) {
  using namespace lp_reader_detail;
  LpFileRead out;

  // Section split, dropping comment lines (leading backslash).
  std::map<std::string, std::string> sections;
  std::vector<std::string> bound_lines;
  std::string current;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '\\') continue;
    if (line == "Maximize" || line == "Subject To" || line == "Bounds" ||
        line == "Binary" || line == "End") {
      current = line;
      continue;
    }
    if (current == "Bounds") {
      if (line.find_first_not_of(" \t") != std::string::npos) {
        bound_lines.push_back(line);
      }
    } else {
      sections[current] += line + "\n";
    }
  }
  if (sections.count("") && !sections[""].empty() &&
      sections[""].find_first_not_of(" \t\n") != std::string::npos) {
    throw std::runtime_error("lp_reader: content before Maximize");
  }

  {  // Objective: " obj: <terms>"
    std::vector<std::string> tokens = tokenize(sections["Maximize"]);
    if (tokens.empty() || tokens[0].back() != ':') {
      throw std::runtime_error("lp_reader: missing objective label");
    }
    std::size_t pos = 1;
    parse_terms(tokens, pos, out.objective, out.objective_offset);
    if (pos != tokens.size()) {
      throw std::runtime_error("lp_reader: trailing objective tokens");
    }
  }

  {  // Constraints: runs of tokens split at `name:` markers.
    std::vector<std::string> tokens = tokenize(sections["Subject To"]);
    std::size_t pos = 0;
    while (pos < tokens.size()) {
      if (tokens[pos].back() != ':') {
        throw std::runtime_error("lp_reader: expected constraint label at '" +
                                 tokens[pos] + "'");
      }
      LpConstraintRead con;
      con.name = tokens[pos].substr(0, tokens[pos].size() - 1);
      ++pos;
      double dropped_constant = 0.0;
      parse_terms(tokens, pos, con.terms, dropped_constant);
      if (dropped_constant != 0.0) {
        throw std::runtime_error("lp_reader: constant inside constraint '" +
                                 con.name + "'");
      }
      if (pos >= tokens.size()) {
        throw std::runtime_error("lp_reader: constraint '" + con.name +
                                 "' has no relation");
      }
      con.relation = tokens[pos];
      ++pos;
      if (pos >= tokens.size()) {
        throw std::runtime_error("lp_reader: constraint '" + con.name +
                                 "' has no right-hand side");
      }
      std::string rhs_tok = tokens[pos];
      double sign = 1.0;
      if (rhs_tok == "-" || rhs_tok == "+") {
        sign = rhs_tok == "-" ? -1.0 : 1.0;
        ++pos;
        rhs_tok = tokens.at(pos);
      }
      con.rhs = sign * to_number(rhs_tok);
      ++pos;
      out.constraints.push_back(std::move(con));
    }
  }

  for (const std::string& bline : bound_lines) {
    std::vector<std::string> tokens = tokenize(bline);
    const double inf = std::numeric_limits<double>::infinity();
    if (tokens.size() == 2 && tokens[1] == "free") {
      out.explicit_bounds[tokens[0]] = {-inf, inf};
    } else if (tokens.size() == 3 && tokens[1] == "=") {
      const double v = to_number(tokens[2]);
      out.explicit_bounds[tokens[0]] = {v, v};
    } else if (tokens.size() == 3 && tokens[1] == "<=") {
      out.explicit_bounds[tokens[0]] = {0.0, to_number(tokens[2])};
    } else if (tokens.size() == 3 && tokens[1] == ">=") {
      out.explicit_bounds[tokens[0]] = {to_number(tokens[2]), inf};
    } else if (tokens.size() == 5 && tokens[1] == "<=" && tokens[3] == "<=") {
      const double lo =
          tokens[0] == "-infinity" ? -inf : to_number(tokens[0]);
      out.explicit_bounds[tokens[2]] = {lo, to_number(tokens[4])};
    } else {
      throw std::runtime_error("lp_reader: unrecognized bound line '" + bline +
                               "'");
    }
  }

  for (const std::string& tok : tokenize(sections["Binary"])) {
    out.binaries.insert(tok);
  }
  return out;
}

#endif  // P2PSCHED_TESTS_SUPPORT_LP_READER_HPP
