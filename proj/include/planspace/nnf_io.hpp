#pragma once

#include "planspace/ddnnf.hpp"
#include "planspace/error.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace planspace {

// c2d-style text format:
//   nnf <nodes> <edges> <vars>
//   L <lit>                       literal leaf
//   A <k> <ids...>                conjunction ("A 0" is true)
//   O <var> 2 <hi> <lo>           decision on <var> ("O 0 0" is false)
// Children refer to earlier lines (0-based); the last node is the root.
// Only nodes reachable from the root are written.
inline void write_nnf(std::ostream& os, const Ddnnf& d) {
  const NodeId root = d.root();
  std::vector<char> reach(d.num_nodes(), 0);
  reach[root] = 1;
  for (NodeId id = root + 1; id-- > 0;)
    if (reach[id])
      for (NodeId c : d.node(id).children) reach[c] = 1;
  std::vector<NodeId> renum(d.num_nodes(), 0);
  std::size_t nodes = 0, edges = 0;
  for (NodeId id = 0; id <= root; ++id)
    if (reach[id]) {
      renum[id] = static_cast<NodeId>(nodes++);
      edges += d.node(id).children.size();
    }
  os << "nnf " << nodes << ' ' << edges << ' ' << d.num_vars() << '\n';
  for (NodeId id = 0; id <= root; ++id) {
    if (!reach[id]) continue;
    const NnfNode& n = d.node(id);
    switch (n.kind) {
      case NodeKind::True: os << "A 0\n"; break;
      case NodeKind::False: os << "O 0 0\n"; break;
      case NodeKind::Literal: os << "L " << n.lit.dimacs() << '\n'; break;
      case NodeKind::And:
        os << "A " << n.children.size();
        for (NodeId c : n.children) os << ' ' << renum[c];
        os << '\n';
        break;
      case NodeKind::Decision:
        os << "O " << n.var << " 2 " << renum[n.children[0]] << ' ' << renum[n.children[1]] << '\n';
        break;
    }
  }
}

inline std::string to_nnf(const Ddnnf& d) {
  std::ostringstream os;
  write_nnf(os, d);
  return os.str();
}

inline Ddnnf read_nnf(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  long long nodes = -1, edges = 0, vars = 0, seen_edges = 0;
  Ddnnf d;

  auto child = [&](std::istringstream& ls) -> NodeId {
    long long c;
    if (!(ls >> c)) throw ParseError(lineno, "missing child id");
    if (c < 0 || c >= static_cast<long long>(d.num_nodes()))
      throw ParseError(lineno, "dangling child id " + std::to_string(c));
    ++seen_edges;
    return static_cast<NodeId>(c);
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    if (nodes < 0) {
      if (tag != "nnf" || !(ls >> nodes >> edges >> vars) || nodes < 0 || edges < 0 || vars < 0)
        throw ParseError(lineno, "malformed header, expected 'nnf <nodes> <edges> <vars>'");
      d = Ddnnf(static_cast<std::size_t>(vars));
      continue;
    }
    if (static_cast<long long>(d.num_nodes()) >= nodes)
      throw ParseError(lineno, "more nodes than the header declares");
    try {
      if (tag == "L") {
        long long l;
        if (!(ls >> l) || l == 0 || l > vars || l < -vars)
          throw ParseError(lineno, "literal out of range");
        d.add_literal(Lit::from_dimacs(static_cast<int>(l)));
      } else if (tag == "A") {
        long long k;
        if (!(ls >> k) || k < 0) throw ParseError(lineno, "malformed conjunction");
        if (k == 0) {
          d.add_true();
        } else {
          std::vector<NodeId> cs;
          for (long long i = 0; i < k; ++i) cs.push_back(child(ls));
          d.add_and(std::move(cs));
        }
      } else if (tag == "O") {
        long long var, k;
        if (!(ls >> var >> k)) throw ParseError(lineno, "malformed decision");
        if (var == 0 && k == 0) {
          d.add_false();
        } else {
          if (k != 2 || var < 1 || var > vars)
            throw ParseError(lineno, "decision needs a variable in range and exactly 2 children");
          NodeId hi = child(ls);
          NodeId lo = child(ls);
          d.add_decision(static_cast<Var>(var), hi, lo);
        }
      } else {
        throw ParseError(lineno, "unknown node tag '" + tag + "'");
      }
    } catch (const ContractError& e) {
      throw ParseError(lineno, e.what());
    }
    std::string extra;
    if (ls >> extra) throw ParseError(lineno, "trailing tokens");
  }
  if (nodes < 0) throw ParseError(lineno, "missing header");
  if (static_cast<long long>(d.num_nodes()) != nodes)
    throw ParseError(lineno, "header declares " + std::to_string(nodes) + " nodes, found " +
                                 std::to_string(d.num_nodes()));
  if (seen_edges != edges)
    throw ParseError(lineno, "header declares " + std::to_string(edges) + " edges, found " +
                                 std::to_string(seen_edges));
  if (nodes == 0) throw ParseError(lineno, "empty d-DNNF");
  d.set_root(static_cast<NodeId>(nodes - 1));
  return d;
}

inline Ddnnf parse_nnf(const std::string& text) {
  std::istringstream in(text);
  return read_nnf(in);
}

}  // namespace planspace
