#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>

#include "ucode/rtl.hpp"

namespace ucode::rtl {

RtlError::RtlError(ErrorCode code, SourceLocation loc, const std::string& message)
    : Error(code, fmt::format("{}:{}: {}", loc.line, loc.column, message)), loc_(loc) {}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// A view into the line plus its starting column, so every token keeps an
// accurate location after trimming and splitting.
struct Piece {
  std::string_view text;
  std::size_t column;  // 1-based column of text[0]
};

Piece trim(Piece p) {
  while (!p.text.empty() && is_space(p.text.front())) {
    p.text.remove_prefix(1);
    ++p.column;
  }
  while (!p.text.empty() && is_space(p.text.back())) p.text.remove_suffix(1);
  return p;
}

std::vector<Piece> split(Piece p, char sep) {
  std::vector<Piece> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= p.text.size(); ++i) {
    if (i == p.text.size() || p.text[i] == sep) {
      out.push_back({p.text.substr(start, i - start), p.column + start});
      start = i + 1;
    }
  }
  return out;
}

std::optional<std::uint64_t> parse_number(std::string_view s) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_instruction_mnemonic(std::string_view m) {
  if (m == "nop" || m == "jcc") return true;
  const auto* e = find_op_type(m);
  return e != nullptr && e->kind != OpKind::BranchCc;
}

constexpr std::string_view kDirectives[] = {".start", ".org", ".sw_branch", ".sw_complete", ".sw_next", ".sw_raw"};

bool is_directive(std::string_view m) {
  return std::find(std::begin(kDirectives), std::end(kDirectives), m) != std::end(kDirectives);
}

Operand parse_operand(Piece p, std::size_t line, bool expect_condition) {
  const SourceLocation loc{line, p.column};
  if (p.text.empty()) throw RtlError(ErrorCode::Syntax, loc, "empty operand");
  Operand op;
  op.text = std::string(p.text);

  if (p.text.front() == '[') {
    if (p.text.back() != ']') throw RtlError(ErrorCode::Syntax, loc, "unterminated memory operand");
    Piece inner = trim({p.text.substr(1, p.text.size() - 2), p.column + 1});
    if (inner.text.empty()) throw RtlError(ErrorCode::Syntax, loc, "memory operand needs a register");
    try {
      op.kind = Operand::Kind::Memory;
      op.reg = lookup_register(inner.text);
    } catch (const Error&) {
      throw RtlError(ErrorCode::Syntax, {line, inner.column},
                     fmt::format("memory operand must be a single register, got '{}'", inner.text));
    }
    return op;
  }

  if (expect_condition) {
    auto cc = parse_condition(p.text);
    if (!cc) throw RtlError(ErrorCode::Syntax, loc, fmt::format("unknown condition '{}'", p.text));
    op.kind = Operand::Kind::Condition;
    op.value = *cc;
    return op;
  }

  if (std::isdigit(static_cast<unsigned char>(p.text.front()))) {
    auto v = parse_number(p.text);
    if (!v) throw RtlError(ErrorCode::Syntax, loc, fmt::format("malformed number '{}'", p.text));
    op.kind = Operand::Kind::Immediate;
    op.value = *v;
    return op;
  }

  try {
    op.kind = Operand::Kind::Register;
    op.reg = lookup_register(p.text);
  } catch (const Error&) {
    throw RtlError(ErrorCode::Syntax, loc, fmt::format("malformed operand '{}'", p.text));
  }
  return op;
}

void check_arity(const RtlStatement& s, std::size_t lo, std::size_t hi) {
  const auto n = s.operands.size();
  if (n < lo || n > hi) {
    const auto expected = lo == hi ? fmt::format("{}", lo) : fmt::format("{} to {}", lo, hi);
    throw RtlError(ErrorCode::Syntax, s.location,
                   fmt::format("'{}' takes {} operand(s), got {}", s.mnemonic, expected, n));
  }
}

RtlStatement parse_statement(Piece p, std::size_t line) {
  RtlStatement s;
  s.location = {line, p.column};

  std::size_t mlen = 0;
  while (mlen < p.text.size() && !is_space(p.text[mlen])) ++mlen;
  std::string mnemonic = to_lower(p.text.substr(0, mlen));
  Piece rest = trim({p.text.substr(mlen), p.column + mlen});

  if (!mnemonic.empty() && mnemonic.front() == '.') {
    if (mnemonic == ".raw") {
      s.kind = StatementKind::Instruction;
    } else if (is_directive(mnemonic)) {
      s.kind = StatementKind::Directive;
    } else {
      throw RtlError(ErrorCode::UnknownMnemonic, s.location, fmt::format("unknown directive '{}'", mnemonic));
    }
  } else {
    if (auto dot = mnemonic.find('.'); dot != std::string::npos) {
      const std::string suffix = mnemonic.substr(dot + 1);
      if (suffix == "f") {
        s.commit_flags = true;
      } else if (suffix == "nf") {
        s.commit_flags = false;
      } else {
        throw RtlError(ErrorCode::UnknownMnemonic, s.location, fmt::format("unknown suffix '.{}'", suffix));
      }
      mnemonic.resize(dot);
    }
    if (!is_instruction_mnemonic(mnemonic)) {
      throw RtlError(ErrorCode::UnknownMnemonic, s.location, fmt::format("unknown mnemonic '{}'", mnemonic));
    }
  }
  s.mnemonic = mnemonic;

  if (!rest.text.empty()) {
    auto parts = split(rest, ',');
    for (std::size_t i = 0; i < parts.size(); ++i) {
      Piece op = trim(parts[i]);
      if (s.kind == StatementKind::Directive || s.mnemonic == ".raw") {
        auto v = parse_number(op.text);
        if (!v) throw RtlError(ErrorCode::Syntax, {line, op.column}, fmt::format("expected a number, got '{}'", op.text));
        Operand o;
        o.kind = Operand::Kind::Immediate;
        o.value = *v;
        o.text = std::string(op.text);
        s.operands.push_back(std::move(o));
      } else {
        s.operands.push_back(parse_operand(op, line, s.mnemonic == "jcc" && i == 0));
      }
    }
  }

  if (s.kind == StatementKind::Directive) {
    if (s.mnemonic == ".sw_complete" || s.mnemonic == ".sw_next") {
      check_arity(s, 0, 0);
    } else {
      check_arity(s, 1, 1);
    }
  } else if (s.mnemonic == ".raw") {
    check_arity(s, 1, 1);
  } else if (s.mnemonic == "nop") {
    check_arity(s, 0, 0);
  } else if (s.commit_flags && (s.mnemonic == "jcc" || find_op_type(s.mnemonic)->op_class != OpClass::RegOp)) {
    throw RtlError(ErrorCode::Syntax, s.location, "flag suffix is only valid on register operations");
  }
  return s;
}

const std::regex kMatchPragma(R"(^\s*//\s*set\s+match\s+register\s+([0-7])\s+to\s+(0x[0-9a-fA-F]+|[0-9]+)\s*$)",
                              std::regex::icase);

}  // namespace

RtlProgram parse_program(std::string_view text) {
  RtlProgram program;
  std::size_t line_no = 0;
  std::size_t bundle_id = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;

    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_match(line.begin(), line.end(), m, kMatchPragma)) {
      program.match_pragmas.push_back(
          {static_cast<std::size_t>(std::stoul(m[1].str())),
           static_cast<std::uint16_t>(std::stoul(m[2].str(), nullptr, 0) & 0xffff)});
      if (program.match_pragmas.back().address > kAddressMask) {
        throw RtlError(ErrorCode::AddressRange, {line_no, 1}, "match register address exceeds 12 bits");
      }
      continue;
    }

    if (auto c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
    Piece body = trim({line, 1});
    if (body.text.empty()) continue;

    auto parts = split(body, ';');
    const bool bundled = parts.size() > 1;
    for (auto& part : parts) {
      Piece stmt = trim(part);
      if (stmt.text.empty()) {
        if (bundled) continue;
        throw RtlError(ErrorCode::Syntax, {line_no, stmt.column}, "empty statement");
      }
      RtlStatement s = parse_statement(stmt, line_no);
      if (bundled) {
        if (s.kind == StatementKind::Directive) {
          throw RtlError(ErrorCode::Syntax, s.location, "directives cannot appear inside an explicit triad");
        }
        s.bundle = bundle_id;
      }
      if (s.mnemonic == ".start" && !program.start_address) {
        program.start_address = static_cast<std::uint16_t>(s.operands[0].value & 0xffff);
      }
      program.statements.push_back(std::move(s));
    }
    if (bundled) ++bundle_id;
  }
  return program;
}

}  // namespace ucode::rtl
