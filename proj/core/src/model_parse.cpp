#include "bifurcat/model_parse.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace bifurcat {

namespace {

// Compiled arithmetic expression: evaluate against a slot-indexed environment.
using Compiled = std::function<double(const std::vector<double>&)>;

struct Token {
  enum Kind { number, ident, op, end } kind = end;
  std::string text;
  double value = 0.0;
};

std::vector<Token> tokenize(const std::string& src, const std::string& where) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char ch = src[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) ||
        (ch == '.' && i + 1 < src.size() &&
         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      const char* begin = src.c_str() + i;
      char* endp = nullptr;
      const double value = std::strtod(begin, &endp);
      if (endp == begin)
        throw UsageError(where + ": malformed number near '" + src.substr(i, 8) + "'");
      Token t;
      t.kind = Token::number;
      t.value = value;
      t.text.assign(begin, static_cast<std::size_t>(endp - begin));
      out.push_back(t);
      i += static_cast<std::size_t>(endp - begin);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      Token t;
      t.kind = Token::ident;
      t.text = src.substr(i, j - i);
      out.push_back(t);
      i = j;
      continue;
    }
    if (std::string("+-*/^(),").find(ch) != std::string::npos) {
      Token t;
      t.kind = Token::op;
      t.text = std::string(1, ch);
      out.push_back(t);
      ++i;
      continue;
    }
    throw UsageError(where + ": unexpected character '" + std::string(1, ch) + "'");
  }
  out.push_back(Token{});
  return out;
}

class ExprParser {
public:
  ExprParser(std::vector<Token> tokens,
             const std::map<std::string, int>& slots, const std::string& where)
      : tokens_(std::move(tokens)), slots_(slots), where_(where) {}

  Compiled parse() {
    Compiled e = expr();
    if (peek().kind != Token::end)
      throw UsageError(where_ + ": trailing input near '" + peek().text + "'");
    return e;
  }

  const std::vector<int>& used_slots() const { return used_; }

private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }
  bool accept_op(const std::string& text) {
    if (peek().kind == Token::op && peek().text == text) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_op(const std::string& text) {
    if (!accept_op(text))
      throw UsageError(where_ + ": expected '" + text + "' near '" + peek().text + "'");
  }

  Compiled expr() {
    Compiled left = term();
    while (peek().kind == Token::op && (peek().text == "+" || peek().text == "-")) {
      const bool plus = take().text == "+";
      Compiled right = term();
      left = plus ? Compiled([left, right](const std::vector<double>& env) {
                      return left(env) + right(env);
                    })
                  : Compiled([left, right](const std::vector<double>& env) {
                      return left(env) - right(env);
                    });
    }
    return left;
  }

  Compiled term() {
    Compiled left = factor();
    while (peek().kind == Token::op && (peek().text == "*" || peek().text == "/")) {
      const bool mul = take().text == "*";
      Compiled right = factor();
      left = mul ? Compiled([left, right](const std::vector<double>& env) {
                     return left(env) * right(env);
                   })
                 : Compiled([left, right](const std::vector<double>& env) {
                     return left(env) / right(env);
                   });
    }
    return left;
  }

  Compiled factor() {
    if (accept_op("-")) {
      Compiled inner = factor();
      return [inner](const std::vector<double>& env) { return -inner(env); };
    }
    if (accept_op("+")) return factor();
    return power();
  }

  Compiled power() {
    Compiled base = atom();
    if (accept_op("^")) {
      Compiled exponent = factor();  // right-associative, unary minus allowed
      return [base, exponent](const std::vector<double>& env) {
        return std::pow(base(env), exponent(env));
      };
    }
    return base;
  }

  Compiled atom() {
    if (accept_op("(")) {
      Compiled inner = expr();
      expect_op(")");
      return inner;
    }
    const Token t = take();
    if (t.kind == Token::number) {
      const double v = t.value;
      return [v](const std::vector<double>&) { return v; };
    }
    if (t.kind == Token::ident) {
      if (t.text == "pow") {
        expect_op("(");
        Compiled base = expr();
        expect_op(",");
        Compiled exponent = expr();
        expect_op(")");
        return [base, exponent](const std::vector<double>& env) {
          return std::pow(base(env), exponent(env));
        };
      }
      if (t.text == "pi") {
        return [](const std::vector<double>&) { return std::numbers::pi; };
      }
      auto it = slots_.find(t.text);
      if (it == slots_.end())
        throw UsageError(where_ + ": unknown identifier '" + t.text + "'");
      const int slot = it->second;
      used_.push_back(slot);
      return [slot](const std::vector<double>& env) { return env[slot]; };
    }
    throw UsageError(where_ + ": unexpected end of expression");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::map<std::string, int>& slots_;
  const std::string where_;
  std::vector<int> used_;
};

struct ParsedLine {
  std::string directive;
  std::string rest;
  int number = 0;
};

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

}  // namespace

double eval_expression(const std::string& expr,
                       const std::map<std::string, double>& vars) {
  std::map<std::string, int> slots;
  std::vector<double> env;
  for (const auto& [name, value] : vars) {
    slots[name] = static_cast<int>(env.size());
    env.push_back(value);
  }
  ExprParser parser(tokenize(expr, "<expression>"), slots, "<expression>");
  return parser.parse()(env);
}

ModelSystem parse_model_text(const std::string& text, const std::string& origin) {
  std::vector<ParsedLine> lines;
  {
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      std::istringstream ls(raw);
      std::string directive;
      if (!(ls >> directive)) continue;
      ParsedLine pl;
      pl.directive = directive;
      std::getline(ls, pl.rest);
      pl.number = number;
      lines.push_back(pl);
    }
  }

  std::string id;
  std::vector<std::string> states, infected, params;
  std::map<std::string, std::string> rhs_exprs, dfe_exprs;

  auto where = [&](int line) {
    return origin + ":" + std::to_string(line);
  };

  for (const auto& line : lines) {
    if (line.directive == "model") {
      const auto words = split_words(line.rest);
      if (words.size() != 1)
        throw UsageError(where(line.number) + ": 'model' takes exactly one id");
      id = words[0];
    } else if (line.directive == "state") {
      for (const auto& w : split_words(line.rest)) states.push_back(w);
    } else if (line.directive == "infected") {
      for (const auto& w : split_words(line.rest)) infected.push_back(w);
    } else if (line.directive == "param") {
      for (const auto& w : split_words(line.rest)) params.push_back(w);
    } else if (line.directive == "rhs" || line.directive == "dfe") {
      std::istringstream ls(line.rest);
      std::string name, eq;
      if (!(ls >> name >> eq) || eq != "=")
        throw UsageError(where(line.number) + ": expected '" + line.directive +
                         " <state> = <expression>'");
      std::string expr;
      std::getline(ls, expr);
      auto& target = line.directive == "rhs" ? rhs_exprs : dfe_exprs;
      if (!target.emplace(name, expr).second)
        throw UsageError(where(line.number) + ": duplicate " + line.directive +
                         " for state '" + name + "'");
    } else {
      throw UsageError(where(line.number) + ": unknown directive '" +
                       line.directive + "'");
    }
  }

  if (id.empty()) throw UsageError(origin + ": missing 'model <id>' line");
  if (states.empty()) throw UsageError(origin + ": missing 'state' line");
  if (infected.empty()) throw UsageError(origin + ": missing 'infected' line");

  const int n = static_cast<int>(states.size());
  std::map<std::string, int> state_slot;
  for (int i = 0; i < n; ++i) {
    if (!state_slot.emplace(states[i], i).second)
      throw UsageError(origin + ": duplicate state '" + states[i] + "'");
  }

  std::map<std::string, int> all_slots = state_slot;  // states 0..n-1, params after
  for (std::size_t i = 0; i < params.size(); ++i) {
    const int slot = n + static_cast<int>(i);
    if (!all_slots.emplace(params[i], slot).second)
      throw UsageError(origin + ": name '" + params[i] + "' declared twice");
  }

  std::vector<int> infected_idx;
  for (const auto& name : infected) {
    auto it = state_slot.find(name);
    if (it == state_slot.end())
      throw UsageError(origin + ": infected name '" + name + "' is not a state");
    infected_idx.push_back(it->second);
  }

  auto compile_per_state = [&](const std::map<std::string, std::string>& exprs,
                               const char* kind, bool states_allowed) {
    std::vector<Compiled> out(n);
    for (const auto& [name, expr] : exprs) {
      auto it = state_slot.find(name);
      if (it == state_slot.end())
        throw UsageError(origin + ": " + kind + " for unknown state '" + name + "'");
      ExprParser parser(tokenize(expr, origin), all_slots, origin);
      out[it->second] = parser.parse();
      if (!states_allowed) {
        for (int slot : parser.used_slots())
          if (slot < n)
            throw UsageError(origin + ": dfe expression for '" + name +
                             "' may reference parameters only");
      }
    }
    for (int i = 0; i < n; ++i)
      if (!out[i])
        throw UsageError(origin + ": missing " + std::string(kind) + " for state '" +
                         states[i] + "'");
    return out;
  };

  const auto rhs_compiled = compile_per_state(rhs_exprs, "rhs", true);
  std::vector<Compiled> dfe_compiled;
  const bool has_dfe = !dfe_exprs.empty();
  if (has_dfe) dfe_compiled = compile_per_state(dfe_exprs, "dfe", false);

  ModelSystem m;
  m.id = id;
  m.n = n;
  m.state_names = states;
  m.infected_idx = infected_idx;
  m.param_names = params;

  const auto param_list = params;  // captured by the lambdas below
  auto fill_env = [n, param_list](const Vec* x, const ParamMap& p) {
    std::vector<double> env(static_cast<std::size_t>(n) + param_list.size(), 0.0);
    if (x)
      for (int i = 0; i < n; ++i) env[i] = (*x)[i];
    for (std::size_t i = 0; i < param_list.size(); ++i)
      env[n + i] = p.at(param_list[i]);
    return env;
  };

  m.rhs = [rhs_compiled, fill_env, n](const Vec& x, const ParamMap& p) {
    const auto env = fill_env(&x, p);
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = rhs_compiled[i](env);
    return out;
  };

  if (has_dfe) {
    m.dfe = [dfe_compiled, fill_env, n](const ParamMap& p) {
      const auto env = fill_env(nullptr, p);
      Vec out(n);
      for (int i = 0; i < n; ++i) out[i] = dfe_compiled[i](env);
      return out;
    };
  } else {
    const std::string mid = id;
    m.dfe = [mid](const ParamMap&) -> Vec {
      throw ModelError(mid + ": model file declares no dfe lines");
    };
  }
  m.admissible = nullptr;  // user models: no built-in admissibility constraints
  return m;
}

ModelSystem parse_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str(), path);
}

}  // namespace bifurcat
