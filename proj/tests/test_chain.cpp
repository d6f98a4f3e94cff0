#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "struedit/chain.hpp"
#include "struedit/oracle.hpp"

using namespace struedit;
namespace fs = std::filesystem;

namespace {

FactTriple t(const std::string& s, const std::string& r, const std::string& o) {
    return FactTriple::from(s, r, o);
}

}  // namespace

// ============================================================
// Chain text parsing and rendering
// ============================================================

TEST_CASE("chain lines parse in order") {
    std::string raw =
        "(WWE Velocity ; created by ; Vince McMahon)\n"
        "(Vince McMahon ; spouse ; Linda McMahon)";
    auto steps = parse_chain_text(raw);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0] == t("WWE Velocity", "created by", "Vince McMahon"));
    CHECK(steps[1] == t("Vince McMahon", "spouse", "Linda McMahon"));
}

TEST_CASE("chain parsing tolerates loose whitespace") {
    auto steps = parse_chain_text("  (  WWE Velocity;created by ;  Vince McMahon )  ");
    REQUIRE(steps.size() == 1);
    CHECK(steps[0] == t("WWE Velocity", "created by", "Vince McMahon"));
}

TEST_CASE("non-triple lines are ignored") {
    std::string raw =
        "Sure, here is the reasoning chain:\n"
        "(A ; r1 ; B)\n"
        "not a triple\n"
        "(two ; fields)\n"
        "(four ; a ; b ; c)\n"
        "( ; r ; o)\n"
        "unbalanced (A ; r ; B\n"
        "(B ; r2 ; C)\n";
    auto steps = parse_chain_text(raw);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0] == t("A", "r1", "B"));
    CHECK(steps[1] == t("B", "r2", "C"));
}

TEST_CASE("a reply with no parsable line is a malformed chain") {
    try {
        parse_chain_text("I think the answer is Joan Lee.");
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.reason() == FailureReason::malformed_chain);
    }
    CHECK_THROWS_AS(parse_chain_text(""), Error);
}

TEST_CASE("rendered chains round-trip and carry no trailing newline") {
    std::vector<FactTriple> steps = {t("A", "r1", "B"), t("B", "r2", "C")};
    std::string text = render_chain_text(steps);
    CHECK(text == "(A ; r1 ; B)\n(B ; r2 ; C)");
    CHECK(parse_chain_text(text) == steps);
    CHECK(render_chain_text({}) == "");
}

// ============================================================
// Skeleton text parsing and rendering
// ============================================================

TEST_CASE("skeleton text parses entity and relation sequence") {
    ReasoningSkeleton skeleton = parse_skeleton_text(
        "entity: WWE Velocity\nrelations: created by -> spouse");
    CHECK(skeleton.source_entity == EntityId::from("WWE Velocity"));
    REQUIRE(skeleton.hop_count() == 2);
    CHECK(skeleton.relations[0] == RelationLabel::from("created by"));
    CHECK(skeleton.relations[1] == RelationLabel::from("spouse"));
}

TEST_CASE("skeleton parsing skips surrounding prose and handles one hop") {
    ReasoningSkeleton skeleton = parse_skeleton_text(
        "Here is the skeleton you asked for.\n"
        "entity: Misty Harbor\n"
        "relations: author\n"
        "Hope that helps.");
    CHECK(skeleton.source_entity == EntityId::from("Misty Harbor"));
    REQUIRE(skeleton.hop_count() == 1);
    CHECK(skeleton.relations[0] == RelationLabel::from("author"));
}

TEST_CASE("skeleton parsing failures are malformed_skeleton") {
    auto reason = [](const std::string& raw) {
        try {
            parse_skeleton_text(raw);
        } catch (const Error& e) {
            return e.reason();
        }
        return FailureReason::malformed_triple;  // wrong on purpose
    };
    CHECK(reason("relations: a -> b") == FailureReason::malformed_skeleton);
    CHECK(reason("entity: X") == FailureReason::malformed_skeleton);
    CHECK(reason("entity: X\nrelations: a -> -> b") == FailureReason::malformed_skeleton);
    CHECK(reason("entity:   \nrelations: a") == FailureReason::malformed_skeleton);
    CHECK(reason("free text only") == FailureReason::malformed_skeleton);
}

TEST_CASE("rendered skeletons round-trip") {
    ReasoningSkeleton skeleton;
    skeleton.source_entity = EntityId::from("Photon Mail");
    skeleton.relations = {RelationLabel::from("owned by"),
                          RelationLabel::from("headquarters location"),
                          RelationLabel::from("country")};
    std::string text = render_skeleton_text(skeleton);
    CHECK(text ==
          "entity: Photon Mail\nrelations: owned by -> headquarters location -> country");
    ReasoningSkeleton back = parse_skeleton_text(text);
    CHECK(back.source_entity == skeleton.source_entity);
    CHECK(back.relations == skeleton.relations);
}

TEST_CASE("skeleton validation rejects empty pieces") {
    ReasoningSkeleton skeleton;
    CHECK_THROWS_AS(skeleton.validate(), Error);
    skeleton.source_entity = EntityId::from("X");
    CHECK_THROWS_AS(skeleton.validate(), Error);
    skeleton.relations.push_back(RelationLabel::from("r"));
    CHECK_NOTHROW(skeleton.validate());
}

// ============================================================
// Chain generation
// ============================================================

TEST_CASE("chain generation parses a well-formed first reply") {
    ScriptedOracle oracle;
    oracle.add_rule("Who created WWE Velocity?",
                    "(WWE Velocity ; created by ; Vince McMahon)\n"
                    "(Vince McMahon ; spouse ; Linda McMahon)");
    TranscriptRecorder recorder(oracle);

    ReasoningChain chain =
        generate_chain("Who created WWE Velocity?", recorder, PromptTemplateSet::defaults());
    REQUIRE(chain.steps.size() == 2);
    CHECK(chain.steps[0].subject == EntityId::from("WWE Velocity"));
    CHECK(chain.linkage_violations.empty());
    CHECK(recorder.call_count() == 1);

    auto transcript = recorder.transcript();
    const std::string& prompt = transcript[0].first.user_text;
    CHECK(prompt.find("Question: Who created WWE Velocity?") != std::string::npos);
    CHECK(prompt.find("Riverdale Gazette") != std::string::npos);  // demos included
}

TEST_CASE("chain generation re-prompts once with the format instruction") {
    ScriptedOracle oracle;
    oracle.add_rule("Answer ONLY with lines of the form", "(A ; r ; B)");
    oracle.add_rule("Question: q1", "I cannot express that as triples.");
    TranscriptRecorder recorder(oracle);

    ReasoningChain chain = generate_chain("q1", recorder, PromptTemplateSet::defaults());
    REQUIRE(chain.steps.size() == 1);
    CHECK(chain.steps[0] == t("A", "r", "B"));
    REQUIRE(recorder.call_count() == 2);
    CHECK(recorder.transcript()[1].first.user_text.find(kChainFormatInstruction) !=
          std::string::npos);
}

TEST_CASE("a second malformed reply propagates malformed_chain") {
    ScriptedOracle oracle;
    oracle.set_fallback("still prose, no triples");
    TranscriptRecorder recorder(oracle);
    try {
        generate_chain("q", recorder, PromptTemplateSet::defaults());
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.reason() == FailureReason::malformed_chain);
    }
    CHECK(recorder.call_count() == 2);
}

TEST_CASE("chain generation records linkage violations") {
    ScriptedOracle oracle;
    oracle.set_fallback(
        "(A ; r1 ; B)\n"
        "(X ; r2 ; C)\n"
        "(C ; r3 ; D)");
    ReasoningChain chain = generate_chain("q", oracle, PromptTemplateSet::defaults());
    CHECK(chain.linkage_violations == std::vector<std::size_t>{1});
}

TEST_CASE("chain generation validates its inputs") {
    ScriptedOracle oracle;
    oracle.set_fallback("(A ; r ; B)");
    CHECK_THROWS_AS(generate_chain("", oracle, PromptTemplateSet::defaults()),
                    std::invalid_argument);
    PromptTemplateSet empty;
    CHECK_THROWS_AS(generate_chain("q", oracle, empty), std::invalid_argument);
}

// ============================================================
// Skeleton extraction
// ============================================================

TEST_CASE("deterministic extraction projects without an oracle") {
    ReasoningChain chain;
    chain.steps = {t("WWE Velocity", "created by", "Vince McMahon"),
                   t("Vince McMahon", "spouse", "Linda McMahon")};
    ReasoningSkeleton skeleton = extract_skeleton(chain, nullptr, PromptTemplateSet::defaults(),
                                                  ExtractionMode::deterministic);
    CHECK(skeleton.source_entity == EntityId::from("WWE Velocity"));
    REQUIRE(skeleton.relations.size() == 2);
    CHECK(skeleton.relations[0] == RelationLabel::from("created by"));
    CHECK(skeleton.relations[1] == RelationLabel::from("spouse"));
}

TEST_CASE("llm extraction asks the oracle and parses its restatement") {
    ReasoningChain chain;
    chain.steps = {t("A", "r1", "B"), t("B", "r2", "C")};

    ScriptedOracle oracle;
    oracle.add_rule("(A ; r1 ; B)\n(B ; r2 ; C)", "entity: A\nrelations: r1 -> r2");
    TranscriptRecorder recorder(oracle);

    ReasoningSkeleton skeleton =
        extract_skeleton(chain, &recorder, PromptTemplateSet::defaults(), ExtractionMode::llm);
    CHECK(skeleton.source_entity == EntityId::from("A"));
    CHECK(skeleton.relations ==
          std::vector<RelationLabel>{RelationLabel::from("r1"), RelationLabel::from("r2")});
    CHECK(recorder.call_count() == 1);
}

TEST_CASE("llm extraction re-prompts once on an unparsable reply") {
    ReasoningChain chain;
    chain.steps = {t("A", "r1", "B")};

    ScriptedOracle oracle;
    oracle.add_rule("Answer ONLY with two lines", "entity: A\nrelations: r1");
    oracle.add_rule("(A ; r1 ; B)", "the skeleton starts at A");
    TranscriptRecorder recorder(oracle);

    ReasoningSkeleton skeleton =
        extract_skeleton(chain, &recorder, PromptTemplateSet::defaults(), ExtractionMode::llm);
    CHECK(skeleton.source_entity == EntityId::from("A"));
    CHECK(recorder.call_count() == 2);
}

TEST_CASE("llm extraction requires an oracle, empty chains are rejected") {
    ReasoningChain chain;
    chain.steps = {t("A", "r1", "B")};
    try {
        extract_skeleton(chain, nullptr, PromptTemplateSet::defaults(), ExtractionMode::llm);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.reason() == FailureReason::oracle_unavailable);
    }

    ReasoningChain empty;
    CHECK_THROWS_AS(extract_skeleton(empty, nullptr, PromptTemplateSet::defaults(),
                                     ExtractionMode::deterministic),
                    Error);
}

// ============================================================
// Prompt template files
// ============================================================

TEST_CASE("prompt templates load from disk and match the built-in defaults") {
    PromptTemplateSet loaded = load_prompt_templates(fs::path(STRUEDIT_FIXTURES_DIR) / "prompts");
    PromptTemplateSet defaults = PromptTemplateSet::defaults();
    CHECK(loaded.chain_generation_system == defaults.chain_generation_system);
    CHECK(loaded.chain_generation_demos == defaults.chain_generation_demos);
    CHECK(loaded.extraction_system == defaults.extraction_system);
    CHECK(loaded.extraction_demos == defaults.extraction_demos);
}

TEST_CASE("template files must hold a system block plus demo pairs") {
    fs::path dir = fs::temp_directory_path() / "struedit_templates";
    fs::create_directories(dir);
    std::ofstream(dir / "chain_generation.txt") << "system only, no demos\n";
    std::ofstream(dir / "skeleton_extraction.txt") << "s\n---\nin\n---\nout\n";
    try {
        load_prompt_templates(dir);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.reason() == FailureReason::dataset_unreadable);
    }
    CHECK_THROWS_AS(load_prompt_templates(fs::temp_directory_path() / "no_such_dir"), Error);
    fs::remove_all(dir);
}

TEST_CASE("an even block count is rejected") {
    fs::path dir = fs::temp_directory_path() / "struedit_templates_even";
    fs::create_directories(dir);
    std::ofstream(dir / "chain_generation.txt") << "s\n---\nin\n---\nout\n---\ndangling\n";
    std::ofstream(dir / "skeleton_extraction.txt") << "s\n---\nin\n---\nout\n";
    CHECK_THROWS_AS(load_prompt_templates(dir), Error);
    fs::remove_all(dir);
}
