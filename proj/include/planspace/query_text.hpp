#pragma once

#include "planspace/error.hpp"
#include "planspace/task.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace planspace {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline QueryLit parse_query_literal(std::string_view tok, const PlanningTask& task) {
  const std::string original(tok);
  bool positive = true;
  while (!tok.empty() && tok.front() == '!') {
    positive = !positive;
    tok = trim(tok.substr(1));
  }
  const auto colon = tok.find(':');
  if (colon == std::string_view::npos)
    throw QueryError("literal '" + original + "' needs an 'op:' or 'atom:' prefix");
  const std::string_view kind = tok.substr(0, colon);
  std::string_view name = tok.substr(colon + 1);
  std::optional<std::size_t> time;
  if (auto at = name.find('@'); at != std::string_view::npos) {
    const std::string digits(name.substr(at + 1));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw QueryError("literal '" + original + "' has a malformed time index");
    time = std::strtoull(digits.c_str(), nullptr, 10);
    name = name.substr(0, at);
  }
  const std::string n(name);
  if (kind == "op") {
    auto id = task.find_operator(n);
    if (!id) throw QueryError("unknown operator '" + n + "'");
    return time ? QueryLit::op_at(*id, *time, positive) : QueryLit::op_ever(*id, positive);
  }
  if (kind == "atom") {
    auto id = task.find_atom(n);
    if (!id) throw QueryError("unknown atom '" + n + "'");
    return time ? QueryLit::atom_at(*id, *time, positive) : QueryLit::atom_ever(*id, positive);
  }
  throw QueryError("literal '" + original + "' has unknown kind '" + std::string(kind) + "'");
}

}  // namespace detail

// Clauses separated by ';', literals by '|'. Literals are op:NAME, atom:NAME,
// op:NAME@i or atom:NAME@i, optionally negated with '!'. The empty string is
// the empty query.
inline Query parse_query(std::string_view text, const PlanningTask& task) {
  Query q;
  if (detail::trim(text).empty()) return q;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(';', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view clause = detail::trim(text.substr(pos, end - pos));
    if (clause.empty()) throw QueryError("empty clause in query");
    std::vector<QueryLit> lits;
    std::size_t p = 0;
    while (p <= clause.size()) {
      std::size_t e = clause.find('|', p);
      if (e == std::string_view::npos) e = clause.size();
      std::string_view tok = detail::trim(clause.substr(p, e - p));
      if (tok.empty()) throw QueryError("empty literal in query");
      lits.push_back(detail::parse_query_literal(tok, task));
      p = e + 1;
    }
    q.clauses.push_back(std::move(lits));
    pos = end + 1;
  }
  return q;
}

inline std::string format_query(const Query& q, const PlanningTask& task) {
  std::string out;
  for (std::size_t i = 0; i < q.clauses.size(); ++i) {
    if (i) out += " ; ";
    for (std::size_t j = 0; j < q.clauses[i].size(); ++j) {
      const QueryLit& l = q.clauses[i][j];
      if (j) out += " | ";
      if (!l.positive) out += '!';
      out += l.is_op() ? "op:" + task.operators.at(l.index).name
                       : "atom:" + task.atoms.at(l.index).name;
      if (l.timed()) out += '@' + std::to_string(l.time);
    }
  }
  return out;
}

}  // namespace planspace
