#include "coherent/rules.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_set>

namespace coherent {

// ---------------------------------------------------------------------------
// ClassTable
// ---------------------------------------------------------------------------

ClassTable::ClassTable(const std::vector<std::string>& names) {
    for (const auto& n : names) {
        if (!valid_identifier(n)) throw SemanticError("invalid class identifier '" + n + "'");
        if (find(n)) throw SemanticError("duplicate class identifier '" + n + "'");
        intern(n);
    }
}

ClassId ClassTable::intern(std::string_view name) {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    auto id = static_cast<ClassId>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
}

std::optional<ClassId> ClassTable::find(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
}

ClassId ClassTable::at(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw SemanticError("unknown class '" + std::string(name) + "'");
}

bool ClassTable::valid_identifier(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (c == ',' || c == '!' || c == '#' || std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return name.find("->") == std::string_view::npos;
}

// ---------------------------------------------------------------------------
// Rule / RuleSet
// ---------------------------------------------------------------------------

Rule::Rule(ClassId h, std::vector<ClassId> pos, std::vector<ClassId> neg)
    : head(h), body_pos(std::move(pos)), body_neg(std::move(neg)) {
    std::sort(body_pos.begin(), body_pos.end());
    body_pos.erase(std::unique(body_pos.begin(), body_pos.end()), body_pos.end());
    std::sort(body_neg.begin(), body_neg.end());
    body_neg.erase(std::unique(body_neg.begin(), body_neg.end()), body_neg.end());
}

bool Rule::is_contradictory() const {
    // both bodies are sorted
    auto p = body_pos.begin();
    auto n = body_neg.begin();
    while (p != body_pos.end() && n != body_neg.end()) {
        if (*p == *n) return true;
        if (*p < *n) ++p; else ++n;
    }
    return false;
}

std::size_t RuleHash::operator()(const Rule& r) const noexcept {
    std::size_t h = std::hash<ClassId>{}(r.head);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (auto c : r.body_pos) mix(c);
    mix(0xfffffffULL);
    for (auto c : r.body_neg) mix(c);
    return h;
}

void RuleSet::add(Rule rule) {
    const auto L = classes_.size();
    auto known = [L](ClassId c) { return c < L; };
    if (!known(rule.head) || !std::all_of(rule.body_pos.begin(), rule.body_pos.end(), known) ||
        !std::all_of(rule.body_neg.begin(), rule.body_neg.end(), known)) {
        throw SemanticError("rule references a class outside the class table");
    }
    if (std::find(rules_.begin(), rules_.end(), rule) != rules_.end()) {
        throw SemanticError("duplicate rule '" + format_rule(rule) + "'");
    }
    rules_.push_back(std::move(rule));
}

bool RuleSet::all_definite() const {
    return std::all_of(rules_.begin(), rules_.end(), [](const Rule& r) { return r.is_definite(); });
}

bool RuleSet::is_hierarchy() const {
    return std::all_of(rules_.begin(), rules_.end(),
                       [](const Rule& r) { return r.body_neg.empty() && r.body_pos.size() == 1; });
}

std::string RuleSet::format_rule(const Rule& r) const {
    std::string out;
    auto sep = [&out] {
        if (!out.empty()) out += ", ";
    };
    for (auto c : r.body_pos) {
        sep();
        out += classes_.name(c);
    }
    for (auto c : r.body_neg) {
        sep();
        out += "!" + classes_.name(c);
    }
    if (!out.empty()) out += " ";
    out += "-> " + classes_.name(r.head);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

// Trims blanks and reports the column of the first kept character.
Token trim(std::string_view s, std::size_t column) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return {s.substr(b, e - b), column + b};
}

std::vector<Token> split_commas(std::string_view s, std::size_t column) {
    std::vector<Token> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ',') {
            out.push_back(trim(s.substr(start, i - start), column + start));
            start = i + 1;
        }
    }
    return out;
}

std::string_view strip_comment(std::string_view line) {
    if (auto pos = line.find('#'); pos != std::string_view::npos) return line.substr(0, pos);
    return line;
}

void require_identifier(const Token& t, std::size_t line) {
    if (t.text.empty()) throw ParseError("expected a class identifier", line, t.column);
    if (!ClassTable::valid_identifier(t.text)) {
        throw ParseError("invalid class identifier '" + std::string(t.text) + "'", line, t.column);
    }
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto end = nl == std::string_view::npos ? text.size() : nl;
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        f(line, ++line_no);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

}  // namespace

RuleSet parse_rules(std::string_view text) {
    ClassTable classes;
    struct Pending {
        Rule rule;
        std::size_t line;
    };
    std::vector<Pending> pending;

    for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
        auto content = trim(strip_comment(raw), 1);
        if (content.text.empty()) return;

        constexpr std::string_view kDecl = "class:";
        auto arrow = content.text.find("->");
        if (arrow == std::string_view::npos) {
            if (content.text.substr(0, kDecl.size()) != kDecl) {
                throw ParseError("expected '->' or a 'class:' declaration", line_no, content.column);
            }
            auto rest = content.text.substr(kDecl.size());
            for (const auto& tok : split_commas(rest, content.column + kDecl.size())) {
                require_identifier(tok, line_no);
                classes.intern(tok.text);
            }
            return;
        }
        if (content.text.find("->", arrow + 2) != std::string_view::npos) {
            throw ParseError("more than one '->' in rule", line_no,
                             content.column + content.text.find("->", arrow + 2));
        }

        auto lhs = content.text.substr(0, arrow);
        auto rhs = trim(content.text.substr(arrow + 2), content.column + arrow + 2);
        if (rhs.text.find(',') != std::string_view::npos) {
            throw ParseError("rule head must be a single class", line_no,
                             rhs.column + rhs.text.find(','));
        }
        require_identifier(rhs, line_no);

        std::vector<std::pair<Token, bool>> literals;  // (identifier, negated)
        if (!trim(lhs, 1).text.empty()) {
            for (auto tok : split_commas(lhs, content.column)) {
                bool negated = false;
                if (!tok.text.empty() && tok.text.front() == '!') {
                    negated = true;
                    tok = trim(tok.text.substr(1), tok.column + 1);
                }
                require_identifier(tok, line_no);
                literals.emplace_back(tok, negated);
            }
        }

        // Intern in textual order so first appearance fixes the class order.
        std::vector<ClassId> pos, neg;
        for (const auto& [tok, negated] : literals) {
            auto id = classes.intern(tok.text);
            auto& same = negated ? neg : pos;
            auto& other = negated ? pos : neg;
            if (std::find(same.begin(), same.end(), id) != same.end()) {
                throw ParseError("duplicate atom '" + std::string(tok.text) + "' in rule body", line_no,
                                 tok.column);
            }
            if (std::find(other.begin(), other.end(), id) != other.end()) {
                throw ParseError("atom '" + std::string(tok.text) +
                                     "' occurs both positively and negatively in one body",
                                 line_no, tok.column);
            }
            same.push_back(id);
        }
        auto head = classes.intern(rhs.text);
        pending.push_back({Rule(head, std::move(pos), std::move(neg)), line_no});
    });

    RuleSet rs(std::move(classes));
    for (auto& p : pending) {
        try {
            rs.add(std::move(p.rule));
        } catch (const SemanticError& e) {
            throw ParseError(e.what(), p.line, 1);
        }
    }
    return rs;
}

std::string serialize_rules(const RuleSet& rs) {
    std::string out;
    if (rs.classes().size() > 0) {
        out += "class: ";
        const auto& names = rs.classes().names();
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out += ", ";
            out += names[i];
        }
        out += "\n";
    }
    for (const auto& r : rs.rules()) out += rs.format_rule(r) + "\n";
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_hierarchy(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> edges;
    for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
        auto content = trim(strip_comment(raw), 1);
        if (content.text.empty()) return;
        auto lt = content.text.find('<');
        if (lt == std::string_view::npos) throw ParseError("expected 'CHILD < PARENT'", line_no, content.column);
        auto child = trim(content.text.substr(0, lt), content.column);
        auto parent = trim(content.text.substr(lt + 1), content.column + lt + 1);
        require_identifier(child, line_no);
        require_identifier(parent, line_no);
        edges.emplace_back(std::string(child.text), std::string(parent.text));
    });
    return edges;
}

RuleSet hierarchy_to_rules(const std::vector<std::pair<std::string, std::string>>& edges) {
    ClassTable classes;
    std::vector<std::pair<ClassId, ClassId>> ids;
    for (const auto& [child, parent] : edges) {
        auto c = classes.intern(child);
        auto p = classes.intern(parent);
        ids.emplace_back(c, p);
    }

    // Cycle check on the subclass -> superclass graph (iterative DFS, colours).
    const auto L = classes.size();
    std::vector<std::vector<ClassId>> succ(L);
    for (auto [c, p] : ids) succ[c].push_back(p);
    for (auto& s : succ) std::sort(s.begin(), s.end());
    enum : std::uint8_t { kWhite, kGrey, kBlack };
    std::vector<std::uint8_t> colour(L, kWhite);
    std::vector<ClassId> parent_of(L, 0);
    for (ClassId root = 0; root < L; ++root) {
        if (colour[root] != kWhite) continue;
        std::vector<std::pair<ClassId, std::size_t>> stack{{root, 0}};
        colour[root] = kGrey;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next == succ[node].size()) {
                colour[node] = kBlack;
                stack.pop_back();
                continue;
            }
            auto to = succ[node][next++];
            if (colour[to] == kGrey) {
                std::string cycle = classes.name(to);
                std::vector<ClassId> path;
                for (auto it = stack.rbegin(); it != stack.rend() && it->first != to; ++it) path.push_back(it->first);
                for (auto it = path.rbegin(); it != path.rend(); ++it) cycle += " < " + classes.name(*it);
                cycle += " < " + classes.name(to);
                throw SemanticError("hierarchy contains a cycle: " + cycle);
            }
            if (colour[to] == kWhite) {
                colour[to] = kGrey;
                parent_of[to] = node;
                stack.emplace_back(to, 0);
            }
        }
    }

    RuleSet rs(std::move(classes));
    for (auto [c, p] : ids) rs.add(Rule(p, {c}));
    return rs;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RuleSet load_rules_file(const std::string& path) {
    const auto text = read_text_file(path);
    // A file without any `->` but with `<` lines is a hierarchy listing.
    bool arrow = false, edge = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = std::string_view(text).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        line = line.substr(0, line.find('#'));
        arrow = arrow || line.find("->") != std::string_view::npos;
        edge = edge || line.find('<') != std::string_view::npos;
    }
    if (edge && !arrow) return hierarchy_to_rules(parse_hierarchy(text));
    return parse_rules(text);
}

}  // namespace coherent
