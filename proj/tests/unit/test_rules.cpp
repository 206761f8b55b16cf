#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "coherent/rules.hpp"
#include "oracles.hpp"

using namespace coherent;
namespace ct = coherent::testing;

namespace {

ParseError parse_failure(std::string_view text) {
    try {
        parse_rules(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no ParseError for: " << text;
    return ParseError("none");
}

}  // namespace

TEST(RuleParser, ReadsRulesFactsAndDeclarations) {
    auto rs = parse_rules("# header\nclass: A, A1\nA1 -> A   # trailing\n\nA, !A1 -> A2\n-> A3\n");
    ASSERT_EQ(rs.classes().names(), (std::vector<std::string>{"A", "A1", "A2", "A3"}));
    ASSERT_EQ(rs.size(), 3u);
    EXPECT_EQ(rs.rules()[0], Rule(0, {1}));
    EXPECT_EQ(rs.rules()[1], Rule(2, {0}, {1}));
    EXPECT_TRUE(rs.rules()[2].is_fact());
    EXPECT_FALSE(rs.all_definite());
}

TEST(RuleParser, FirstAppearanceFixesClassOrder) {
    auto rs = parse_rules("B, C -> A\n");
    EXPECT_EQ(rs.classes().names(), (std::vector<std::string>{"B", "C", "A"}));
}

TEST(RuleParser, ErrorsCarryLineAndColumn) {
    auto e = parse_failure("A -> B\nA, A -> C\n");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 4u);

    e = parse_failure("A -> B -> C\n");
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 8u);

    e = parse_failure("\n\n  just words\n");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 3u);

    e = parse_failure("A, !A -> B\n");
    EXPECT_EQ(e.line(), 1u);

    e = parse_failure("A -> B, C\n");
    EXPECT_EQ(e.line(), 1u);

    e = parse_failure("A -> B\nA -> B\n");
    EXPECT_EQ(e.line(), 2u);

    e = parse_failure("A, -> B\n");
    EXPECT_EQ(e.line(), 1u);
}

TEST(RuleParser, RoundTripsRandomPrograms) {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        auto rs = ct::random_program(rng);
        auto text = serialize_rules(rs);
        auto back = parse_rules(text);
        ASSERT_EQ(back, rs) << text;
        ASSERT_EQ(serialize_rules(back), text);
    }
}

TEST(RuleSet, RejectsDuplicatesAndUnknownClasses) {
    RuleSet rs{ClassTable({"A", "B"})};
    rs.add(Rule(0, {1}));
    EXPECT_THROW(rs.add(Rule(0, {1})), SemanticError);
    EXPECT_THROW(rs.add(Rule(5, {1})), SemanticError);
    EXPECT_TRUE(rs.is_hierarchy());
}

TEST(ClassTable, ValidatesIdentifiers) {
    EXPECT_THROW(ClassTable({"A", "A"}), SemanticError);
    EXPECT_THROW(ClassTable({"has space"}), SemanticError);
    EXPECT_THROW(ClassTable({"!neg"}), SemanticError);
    ClassTable t({"x.y", "A_1"});
    EXPECT_EQ(t.at("A_1"), 1u);
    EXPECT_THROW(t.at("missing"), SemanticError);
}

TEST(Hierarchy, ConvertsEdgesToRules) {
    auto rs = hierarchy_to_rules(parse_hierarchy("# tree\nA1 < A\nA2 < A\n"));
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_TRUE(rs.is_hierarchy());
    const auto& c = rs.classes();
    EXPECT_EQ(rs.rules()[0], Rule(c.at("A"), {c.at("A1")}));
    EXPECT_THROW(hierarchy_to_rules(parse_hierarchy("A < B\nB < A\n")), SemanticError);
    EXPECT_THROW(parse_hierarchy("A B\n"), ParseError);
}

TEST(Hierarchy, FileLoaderDetectsFormat) {
    const auto dir = std::filesystem::path(COHERENT_TEST_DATA_DIR) / "rules_files";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "tree.txt") << "A1 < A\n";
        std::ofstream(dir / "prog.rules") << "A1 -> A\n";
    }
    auto a = load_rules_file((dir / "tree.txt").string());
    auto b = load_rules_file((dir / "prog.rules").string());
    EXPECT_EQ(a.rules().size(), 1u);
    EXPECT_EQ(a.classes().names(), (std::vector<std::string>{"A1", "A"}));
    EXPECT_EQ(b.classes().names(), a.classes().names());
    EXPECT_EQ(a, b);
}
