#include "uma/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

namespace {

struct SceneSpec {
    const char* name;
    std::int64_t lo_cents;
    std::int64_t hi_cents;
};

struct CategorySpec {
    const char* name;
    std::vector<SceneSpec> scenes;
};

const std::vector<CategorySpec>& category_specs() {
    static const std::vector<CategorySpec> specs = {
        {"Dining",
         {{"Fast Food", 800, 2500},
          {"Restaurant", 2500, 12000},
          {"Coffee", 300, 800},
          {"Bubble Tea", 400, 900},
          {"BBQ", 3000, 9000},
          {"Hot Pot", 3500, 11000},
          {"Snacks", 200, 1500},
          {"Takeout", 1200, 4500}}},
        {"Transportation",
         {{"Subway", 200, 500},
          {"Bus", 100, 300},
          {"Taxi", 800, 4000},
          {"Gas", 3000, 8000},
          {"Parking", 500, 2500},
          {"Train", 2000, 15000},
          {"Flight", 15000, 90000}}},
        {"Shopping",
         {{"Clothing", 2000, 20000},
          {"Electronics", 5000, 150000},
          {"Daily Necessities", 500, 6000},
          {"Cosmetics", 1500, 15000},
          {"Books", 800, 6000},
          {"Groceries", 2000, 15000},
          {"Furniture", 8000, 120000}}},
        {"Entertainment",
         {{"Movie", 1000, 2500},
          {"KTV", 2000, 8000},
          {"Gaming", 500, 7000},
          {"Gym", 2000, 10000},
          {"Travel", 10000, 150000},
          {"Concert", 5000, 30000},
          {"Escape Room", 2500, 6000}}},
        {"Utilities",
         {{"Water & Electricity", 4000, 15000},
          {"Property Fee", 5000, 20000},
          {"Phone Bill", 2000, 8000},
          {"Internet", 3000, 9000},
          {"Gas Bill", 1500, 8000},
          {"Rent", 50000, 250000}}},
        {"Medical",
         {{"Medicine", 500, 6000},
          {"Doctor Visit", 2000, 20000},
          {"Health Checkup", 8000, 40000},
          {"Dental", 5000, 50000},
          {"Glasses", 8000, 40000}}},
        {"Education",
         {{"Training Course", 10000, 100000},
          {"Books & Materials", 1500, 12000},
          {"Online Course", 2000, 30000},
          {"Exam Registration", 3000, 20000},
          {"Tuition", 50000, 500000}}},
        {"Other",
         {{"Transfer", 1000, 50000},
          {"Red Envelope", 500, 20000},
          {"Donation", 500, 10000},
          {"Pet", 1000, 15000},
          {"Beauty & Salon", 2000, 15000}}},
    };
    return specs;
}

}  // namespace

Taxonomy::Taxonomy() {
    for (const auto& cat : category_specs()) {
        categories_.emplace_back(cat.name);
        std::vector<std::string> names;
        for (const auto& scene : cat.scenes) {
            names.emplace_back(scene.name);
            all_.push_back({cat.name, scene.name});
            ranges_.push_back({scene.name, {scene.lo_cents, scene.hi_cents}});
        }
        scenes_.emplace_back(cat.name, std::move(names));
    }
}

const Taxonomy& Taxonomy::standard() {
    static const Taxonomy instance;
    return instance;
}

const std::vector<std::string>& Taxonomy::scenes(const std::string& category) const {
    for (const auto& [name, scenes] : scenes_) {
        if (name == category) return scenes;
    }
    throw ValidationError("unknown category: " + category);
}

bool Taxonomy::valid(const std::string& category, const std::string& scene) const {
    for (const auto& [name, scenes] : scenes_) {
        if (name != category) continue;
        return std::find(scenes.begin(), scenes.end(), scene) != scenes.end();
    }
    return false;
}

std::optional<std::string> Taxonomy::category_of(const std::string& scene) const {
    for (const auto& ref : all_) {
        if (ref.scene == scene) return ref.category;
    }
    return std::nullopt;
}

std::pair<Money, Money> Taxonomy::amount_range(const SceneRef& ref) const {
    for (const auto& [scene, range] : ranges_) {
        if (scene == ref.scene) {
            return {Money::from_cents(range.first), Money::from_cents(range.second)};
        }
    }
    throw ValidationError("unknown scene: " + ref.scene);
}

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

namespace {

constexpr std::pair<QuestionTemplate, std::string_view> kTemplateNames[] = {
    {QuestionTemplate::TimeRangeSceneAmount, "time_range_scene_amount"},
    {QuestionTemplate::TimeRangeMultiScene, "time_range_multi_scene"},
    {QuestionTemplate::GlobalTotal, "global_total"},
    {QuestionTemplate::MaxScene, "max_scene"},
    {QuestionTemplate::MaxFrequencyDate, "max_frequency_date"},
    {QuestionTemplate::MaxSingleAmount, "max_single_amount"},
    {QuestionTemplate::PointQuery, "point_query"},
    {QuestionTemplate::SingleDateSceneAmount, "single_date_scene_amount"},
};

}  // namespace

std::string_view template_name(QuestionTemplate t) {
    for (const auto& [tmpl, name] : kTemplateNames) {
        if (tmpl == t) return name;
    }
    return "?";
}

std::optional<QuestionTemplate> template_from_name(std::string_view name) {
    for (const auto& [tmpl, n] : kTemplateNames) {
        if (n == name) return tmpl;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

std::vector<Date> sample_timeline(const Date& start, const Date& end, int n,
                                  std::uint64_t seed) {
    if (!start.valid() || !end.valid() || end < start) {
        throw ValidationError("invalid timeline range");
    }
    const long span = days_between(start, end) + 1;
    if (n <= 0 || static_cast<long>(n) > span) {
        throw RangeTooSmall("cannot sample " + std::to_string(n) + " distinct dates from " +
                            std::to_string(span) + " days");
    }
    Rng rng(seed);
    auto offsets = rng.sample_distinct(static_cast<std::size_t>(span),
                                       static_cast<std::size_t>(n));
    std::sort(offsets.begin(), offsets.end());
    std::vector<Date> out;
    out.reserve(offsets.size());
    const long base = start.day_number();
    for (auto off : offsets) out.push_back(Date::from_day_number(base + static_cast<long>(off)));
    return out;
}

std::vector<SceneRef> sample_scenes(const Taxonomy& taxonomy, Rng& rng) {
    const auto& all = taxonomy.all_scenes();
    const int count = static_cast<int>(rng.uniform_int(1, 5));
    auto picks = rng.sample_distinct(all.size(), static_cast<std::size_t>(count));
    std::vector<SceneRef> out;
    out.reserve(picks.size());
    for (auto i : picks) out.push_back(all[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic dialogue synthesis
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& opener_user_pool() {
    static const std::vector<std::string> pool = {
        "Hey, I have a few expenses from today that I want to get into the ledger before I "
        "forget the details. Can we go through them one by one? I would much rather spend a "
        "couple of minutes now than sit down at the end of the month with a pile of cryptic "
        "card statements and try to reconstruct what on earth each line item was. That "
        "exercise never goes well and it always ends with at least one mystery charge I "
        "cannot explain to myself.",
        "Hi again. Bookkeeping time — I made a few purchases today and I want each one "
        "recorded properly. My memory for numbers has been terrible lately, genuinely "
        "terrible, so let's write everything down while the receipts are still in front of "
        "me and the amounts are fresh. I have been burned before by telling myself I would "
        "remember a figure and then confidently misremembering it by twenty dollars.",
        "Good evening! Before I wind down for the night I want to log today's spending. "
        "There are a few items, some small and some less small, and I want the amounts "
        "captured exactly as they appear on the receipts, cents included. I have a mild "
        "superstition that the one entry I round off will be the one I later need to check "
        "against a refund, so let's be precise.",
        "Hello! Quick finance check-in. I promised myself I would keep the ledger current "
        "this year instead of batching three weeks of receipts into one miserable Sunday "
        "afternoon, so here I am with today's expenses while they are still fresh in my "
        "mind. Hold me to this habit if I ever show up with a backlog again. Ready when "
        "you are.",
    };
    return pool;
}

const std::vector<std::string>& opener_assistant_pool() {
    static const std::vector<std::string> pool = {
        "Of course! Walk me through them one at a time and I'll record each amount under "
        "the right category as we go. Taking them individually keeps the entries clean and "
        "means your category totals will stay accurate when you ask for summaries later.",
        "Happy to help. Tell me what you spent and where, and I'll file every entry with "
        "today's date and the exact amount you give me, so that later range queries and "
        "month-end summaries line up with reality instead of an approximation of it.",
        "Sure thing. Give me the amounts one by one — I'll confirm each entry back to you "
        "as I save it, so if anything sounds off you can correct it immediately rather "
        "than discovering a typo three weeks from now.",
        "Ready! List them in any order you like. I'll make sure each record lands in the "
        "proper category with the exact amount and today's date attached, and I'll keep a "
        "running sense of the day so nothing gets dropped between messages.",
    };
    return pool;
}

const std::vector<std::string>& tx_user_pool() {
    // Placeholders: {amount} {scene} {scene_l} {category} {detail} {detail2}
    static const std::vector<std::string> pool = {
        "First up: I spent ${amount} on {scene_l} today. {detail} {detail2} Please put that "
        "under {category} so the category totals stay meaningful when I review them later — "
        "and keep the cents, because I will absolutely be checking this against my bank "
        "statement at some point.",
        "Oh, and there was the {scene_l} — that one came to ${amount} in the end. {detail} "
        "{detail2} File it with the {category} records please, exact amount as stated. I "
        "went back and forth on whether it was worth it, but the ledger doesn't judge, it "
        "just records.",
        "Next item. {scene} set me back ${amount}. {detail} {detail2} That belongs in "
        "{category}, I believe; let me know if you'd classify it differently, but the "
        "number itself is correct — I read it straight off the receipt, twice, because I "
        "didn't believe it the first time.",
        "I also paid ${amount} for {scene_l}. {detail} {detail2} Log it under {category} "
        "with today's date so it shows up properly if I ever ask how this period went. I'm "
        "trying to build an honest picture of where the money actually goes, not the "
        "flattering version.",
        "Another one for the books: {scene_l}, totalling ${amount}. {detail} {detail2} "
        "Category should be {category}. I double-checked the receipt before messaging you, "
        "so that figure is final and you can store it without any rounding or adjustment.",
    };
    return pool;
}

const std::vector<std::string>& tx_assistant_pool() {
    // Placeholders: {amount} {scene} {category}
    static const std::vector<std::string> pool = {
        "Done — I recorded ${amount} for {scene} under {category}. The entry carries "
        "today's date, so any range summary or category breakdown you ask for later will "
        "pick it up correctly. That's one more data point toward an accurate month.",
        "Got it. ${amount} filed to {category} / {scene}. I saved the amount exactly as "
        "you stated it, down to the cent, so a future reconciliation against your bank "
        "statement should match without any manual fudging.",
        "Recorded: {scene}, ${amount}, category {category}. Your running records for today "
        "now include this entry alongside the others, and the stored figure is precisely "
        "what you quoted — no rounding on my side.",
        "Noted and saved. That's ${amount} against {category} for the {scene} purchase, "
        "stored with today's date. If you ever want to know what this day cost you in "
        "total or by category, this entry will be counted exactly once.",
    };
    return pool;
}

const std::vector<std::string>& detail_pool() {
    static const std::vector<std::string> pool = {
        "It ended up costing a little more than I expected, but honestly it was worth it "
        "this time.",
        "I nearly forgot about it because the receipt spent the whole afternoon buried at "
        "the bottom of my bag.",
        "Nothing fancy, just one of those small things that quietly add up over the course "
        "of a month.",
        "I compared a couple of options first and this was genuinely the most reasonable "
        "one available.",
        "Slightly embarrassing how routine this has become, but at least now it's a "
        "documented routine.",
        "There was a short queue and I almost walked away, which in hindsight would have "
        "saved me money.",
        "The price was exactly what was advertised for once, which I appreciated more than "
        "I should have.",
        "I split the decision-making with a friend but the payment itself was entirely "
        "mine.",
        "The cashier asked if I wanted the receipt and for once I said yes, purely for "
        "your benefit.",
        "It was a planned purchase for about two weeks, so no impulse-buying lecture is "
        "required this time.",
    };
    return pool;
}

const std::vector<std::pair<std::string, std::string>>& noise_pool() {
    static const std::vector<std::pair<std::string, std::string>> pool = {
        {"By the way, the weather has been all over the place this week — bright and sunny "
         "in the morning and pouring rain by mid-afternoon. I keep leaving my umbrella at "
         "the office and regretting it on the walk home, and at this point the forecast "
         "apps feel less like predictions and more like gentle suggestions.",
         "I hear you. At least the forecast looks calmer for the weekend, which should "
         "make your errands a little easier to plan around. Keeping a spare umbrella by "
         "the door has saved more than one of my users a soggy commute, for what it's "
         "worth."},
        {"Completely unrelated, but I finally finished that series everyone kept "
         "recommending to me for the better part of a year. The ending was divisive, "
         "apparently, though I thought it landed pretty well all things considered, and "
         "now I have no idea what to do with my evenings.",
         "Nice! It's always satisfying to close out a long series, and a little "
         "disorienting afterward. Divisive endings at least give you something to argue "
         "about with friends, which arguably extends the entertainment value for free."},
        {"Random thought: I should really start meal-prepping on Sundays again. Every "
         "time I stop, the week gets chaotic, my schedule falls apart by Wednesday, and — "
         "not that I need to tell you of all assistants — the food spending creeps up in "
         "ways that are very visible in hindsight.",
         "A little structure on Sunday does seem to pay for itself across the week. Even "
         "prepping two or three meals can take the pressure off the busiest days, and "
         "yes, the ledger does tend to notice the difference before you do."},
        {"My neighbor adopted the loudest dog I have ever encountered. Lovely animal, "
         "genuinely, friendly and soft-eared and all of that, but the six a.m. "
         "announcements to the entire street are testing my patience a little more each "
         "morning.",
         "That's a rough alarm clock. Hopefully the novelty wears off and the morning "
         "announcements get shorter as the dog settles in. In the meantime, earplugs are "
         "cheaper than moving, if we're thinking in ledger terms."},
        {"I keep meaning to ask — do you think keeping a ledger actually changes spending "
         "habits, or does it just document the damage in higher resolution? I ask because "
         "I have felt both effects in the same week, sometimes in the same afternoon.",
         "A bit of both, usually. Seeing the numbers written down tends to nudge decisions "
         "at the margin, even when it doesn't feel like it in the moment. And when it "
         "doesn't nudge anything, at least the damage report is accurate."},
        {"The elevator in my building is out again, third time this month. The stairs are "
         "fine as exercise, I keep telling myself, but moving anything bulkier than a "
         "grocery bag has become a two-person logistics operation with scheduling "
         "overhead.",
         "Third time in a month is a pattern, not an accident. It might be worth flagging "
         "to the building manager in writing before the next time you need to carry "
         "something heavy — future you will be grateful."},
    };
    return pool;
}

const std::vector<std::string>& closer_user_pool() {
    static const std::vector<std::string> pool = {
        "That's everything for today. Thanks for keeping this tidy — it genuinely lowers "
        "my end-of-month dread.",
        "Okay, that's the lot for today. Good to have it all written down somewhere more "
        "reliable than my memory.",
        "Done for today — appreciated as always. Future me reviewing this month will "
        "thank present me for the diligence.",
        "That covers it for now. Same time next expense, I suppose. The habit is slowly "
        "sticking.",
    };
    return pool;
}

const std::vector<std::string>& closer_assistant_pool() {
    static const std::vector<std::string> pool = {
        "All saved. Your records for today are complete and ready for any future "
        "summaries, totals, or category breakdowns you might ask for.",
        "Everything is recorded with exact amounts and today's date. Ask me anytime if "
        "you want totals, ranges, or a breakdown later — the data will be ready.",
        "Saved and organized. Your ledger is current as of today, and every figure is "
        "stored precisely as you reported it.",
        "All set — each entry is stored with its exact amount and today's date, so "
        "whatever question you ask about this period later, the answer will be grounded "
        "in what actually happened.",
    };
    return pool;
}

const std::vector<std::string>& description_pool() {
    static const std::vector<std::string> pool = {
        "usual spot", "with friends",    "weekly habit",   "long overdue",
        "last minute", "planned ahead",  "family errand",  "work related",
        "weekend treat", "online order",
    };
    return pool;
}

std::string fill(std::string text, std::string_view placeholder, std::string_view value) {
    const std::string token = "{" + std::string(placeholder) + "}";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
    return text;
}

Session synthesize_deterministic(const Date& date, const std::vector<SceneRef>& intents,
                                 const Taxonomy& taxonomy, Rng& rng) {
    Session session;
    session.date = date;

    for (const auto& intent : intents) {
        const auto [lo, hi] = taxonomy.amount_range(intent);
        Transaction tx;
        tx.date = date;
        tx.category = intent.category;
        tx.scene = intent.scene;
        tx.amount = Money::from_cents(rng.uniform_int(lo.cents(), hi.cents()));
        tx.description = intent.scene + ", " + rng.pick(description_pool());
        session.transactions.push_back(std::move(tx));
    }

    session.dialogue.push_back({"user", rng.pick(opener_user_pool())});
    session.dialogue.push_back({"assistant", rng.pick(opener_assistant_pool())});

    const std::size_t n_tx = session.transactions.size();
    const std::size_t noise_budget = (n_tx + 1) / 2;  // one exchange per two transactions
    std::size_t noise_used = 0;
    for (std::size_t i = 0; i < n_tx; ++i) {
        const Transaction& tx = session.transactions[i];
        std::string user = rng.pick(tx_user_pool());
        user = fill(user, "amount", tx.amount.str());
        user = fill(user, "scene", tx.scene);
        user = fill(user, "scene_l", to_lower(tx.scene));
        user = fill(user, "category", tx.category);
        user = fill(user, "detail", rng.pick(detail_pool()));
        user = fill(user, "detail2", rng.pick(detail_pool()));
        session.dialogue.push_back({"user", std::move(user)});

        std::string assistant = rng.pick(tx_assistant_pool());
        assistant = fill(assistant, "amount", tx.amount.str());
        assistant = fill(assistant, "scene", tx.scene);
        assistant = fill(assistant, "category", tx.category);
        session.dialogue.push_back({"assistant", std::move(assistant)});

        if ((i % 2 == 1 || i + 1 == n_tx) && noise_used < noise_budget) {
            const auto& [nu, na] = rng.pick(noise_pool());
            session.dialogue.push_back({"user", nu});
            session.dialogue.push_back({"assistant", na});
            ++noise_used;
        }
    }

    session.dialogue.push_back({"user", rng.pick(closer_user_pool())});
    session.dialogue.push_back({"assistant", rng.pick(closer_assistant_pool())});
    return session;
}

// ---------------------------------------------------------------------------
// LLM-backed synthesis
// ---------------------------------------------------------------------------

std::string synthesis_prompt(const Date& date, const std::vector<SceneRef>& intents,
                             bool is_first, int min_turns, int max_turns) {
    std::string scenes;
    for (std::size_t i = 0; i < intents.size(); ++i) {
        if (i > 0) scenes += ", ";
        scenes += intents[i].category + " - " + intents[i].scene;
    }
    std::string prompt =
        "Please generate a natural conversation between a user and an AI assistant about "
        "expense tracking.\n"
        "Context:\n"
        "- Date: " + date.str() + "\n"
        "- The user wants to record: " + scenes + "\n";
    prompt += is_first
                  ? "- This is the first session between the user and the assistant.\n"
                  : "- This is a continuation of an ongoing expense-tracking relationship.\n";
    prompt +=
        "Requirements:\n"
        "- The dialogue should be natural, containing " + std::to_string(min_turns) + "-" +
        std::to_string(max_turns) + " turns.\n"
        "- Each consumption scene needs a specific amount (you decide a reasonable amount).\n"
        "- Return JSON with two fields:\n"
        "  1. \"dialogue\": List of turns.\n"
        "  2. \"transactions\": List of records (scene, amount, description, date).\n";
    return prompt;
}

std::optional<Session> parse_llm_session(const std::string& text, const Date& date,
                                         const Taxonomy& taxonomy) {
    // First balanced JSON object in the completion.
    std::size_t start = text.find('{');
    ordered_json j;
    bool found = false;
    while (start != std::string::npos && !found) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    j = ordered_json::parse(text.substr(start, i - start + 1), nullptr, false);
                    found = !j.is_discarded() && j.is_object();
                    break;
                }
            }
        }
        if (!found) start = text.find('{', start + 1);
    }
    if (!found || !j.contains("dialogue") || !j.contains("transactions")) return std::nullopt;

    Session session;
    session.date = date;
    for (const auto& turn : j["dialogue"]) {
        DialogueTurn t;
        if (turn.is_string()) {
            t.speaker = session.dialogue.size() % 2 == 0 ? "user" : "assistant";
            t.text = turn.get<std::string>();
        } else if (turn.is_object()) {
            t.speaker = turn.value("speaker", turn.value("role", ""));
            t.text = turn.value("text", turn.value("content", ""));
        }
        if (t.speaker != "user" && t.speaker != "assistant") return std::nullopt;
        if (t.text.empty()) return std::nullopt;
        session.dialogue.push_back(std::move(t));
    }
    if (session.dialogue.empty()) return std::nullopt;

    for (const auto& rec : j["transactions"]) {
        if (!rec.is_object()) return std::nullopt;
        Transaction tx;
        tx.date = date;  // transactions always carry the session date
        tx.scene = rec.value("scene", "");
        const auto category = taxonomy.category_of(tx.scene);
        if (!category) return std::nullopt;
        tx.category = *category;
        if (rec.contains("amount") && rec["amount"].is_number()) {
            tx.amount = Money::from_cents(
                static_cast<std::int64_t>(std::llround(rec["amount"].get<double>() * 100.0)));
        } else if (rec.contains("amount") && rec["amount"].is_string()) {
            auto parsed = Money::parse(rec["amount"].get<std::string>());
            if (!parsed) return std::nullopt;
            tx.amount = *parsed;
        } else {
            return std::nullopt;
        }
        if (tx.amount.cents() <= 0) return std::nullopt;
        tx.description = rec.value("description", tx.scene);
        session.transactions.push_back(std::move(tx));
    }
    if (session.transactions.empty()) return std::nullopt;
    return session;
}

}  // namespace

Session synthesize_session(const Date& date, const std::vector<SceneRef>& intents,
                           const Taxonomy& taxonomy, Rng& rng, SynthesisMode mode,
                           Policy* provider) {
    if (intents.empty()) throw ValidationError("synthesize_session requires intents");
    if (mode == SynthesisMode::Deterministic) {
        return synthesize_deterministic(date, intents, taxonomy, rng);
    }
    if (!provider) throw ValidationError("llm synthesis mode requires a provider");

    const int n = static_cast<int>(intents.size());
    const std::string prompt =
        synthesis_prompt(date, intents, /*is_first=*/false, 2 * n + 2, 3 * n + 4);
    for (int attempt = 0; attempt < 3; ++attempt) {
        const Completion completion = provider->complete(prompt, Phase::Maintenance);
        if (auto session = parse_llm_session(completion.text, date, taxonomy)) {
            return *session;
        }
    }
    Session fallback = synthesize_deterministic(date, intents, taxonomy, rng);
    fallback.llm_fallback = true;
    return fallback;
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

std::string oracle_answer(const std::vector<Transaction>& ledger, QuestionTemplate tmpl,
                          const QuestionParams& params) {
    if (ledger.empty()) throw NoMatchingRecords("ledger is empty");

    auto in_range = [&](const Transaction& t) {
        if (params.from && t.date < *params.from) return false;
        if (params.to && *params.to < t.date) return false;
        return true;
    };
    auto in_categories = [&](const Transaction& t) {
        return std::find(params.categories.begin(), params.categories.end(), t.category) !=
               params.categories.end();
    };

    switch (tmpl) {
        case QuestionTemplate::TimeRangeSceneAmount:
        case QuestionTemplate::TimeRangeMultiScene: {
            Money sum;
            bool any = false;
            for (const auto& t : ledger) {
                if (in_range(t) && in_categories(t)) {
                    sum += t.amount;
                    any = true;
                }
            }
            if (!any) throw NoMatchingRecords("no transactions in the selected range");
            return sum.str();
        }
        case QuestionTemplate::GlobalTotal: {
            Money sum;
            for (const auto& t : ledger) sum += t.amount;
            return sum.str();
        }
        case QuestionTemplate::MaxScene: {
            std::map<std::string, Money> totals;
            for (const auto& t : ledger) totals[t.category] += t.amount;
            std::string best;
            Money best_total;
            for (const auto& [cat, total] : totals) {
                if (best.empty() || best_total < total) {
                    best = cat;
                    best_total = total;
                }
            }
            return best;
        }
        case QuestionTemplate::MaxFrequencyDate: {
            std::map<Date, int> counts;
            for (const auto& t : ledger) ++counts[t.date];
            Date best{};
            int best_count = -1;
            for (const auto& [date, count] : counts) {
                if (count > best_count) {
                    best = date;
                    best_count = count;
                }
            }
            return best.str();
        }
        case QuestionTemplate::MaxSingleAmount: {
            Money best;
            for (const auto& t : ledger) best = std::max(best, t.amount);
            return best.str();
        }
        case QuestionTemplate::PointQuery: {
            Money sum;
            bool any = false;
            for (const auto& t : ledger) {
                if (params.date && t.date == *params.date && t.scene == params.scene) {
                    sum += t.amount;
                    any = true;
                }
            }
            if (!any) throw NoMatchingRecords("no transactions for that scene and date");
            return sum.str();
        }
        case QuestionTemplate::SingleDateSceneAmount: {
            Money sum;
            bool any = false;
            for (const auto& t : ledger) {
                if (params.date && t.date == *params.date && in_categories(t)) {
                    sum += t.amount;
                    any = true;
                }
            }
            if (!any) throw NoMatchingRecords("no transactions for that category and date");
            return sum.str();
        }
    }
    throw ValidationError("unknown question template");
}

// ---------------------------------------------------------------------------
// Question generation
// ---------------------------------------------------------------------------

namespace {

std::string join_with_and(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += i + 1 == items.size() ? " and " : ", ";
        out += items[i];
    }
    return out;
}

std::string question_text(QuestionTemplate tmpl, const QuestionParams& p) {
    switch (tmpl) {
        case QuestionTemplate::TimeRangeSceneAmount:
            return "How much was spent on " + p.categories[0] + " from " + p.from->str() +
                   " to " + p.to->str() + "?";
        case QuestionTemplate::TimeRangeMultiScene:
            return "What was the total spending on " + join_with_and(p.categories) + " from " +
                   p.from->str() + " to " + p.to->str() + "?";
        case QuestionTemplate::GlobalTotal:
            return "What was the total spending across all records?";
        case QuestionTemplate::MaxScene:
            return "Which category had the highest total spending?";
        case QuestionTemplate::MaxFrequencyDate:
            return "On which date were there the most transactions?";
        case QuestionTemplate::MaxSingleAmount:
            return "What was the largest single transaction amount?";
        case QuestionTemplate::PointQuery:
            return "How much was spent on " + p.scene + " on " + p.date->str() + "?";
        case QuestionTemplate::SingleDateSceneAmount:
            return "How much was spent on " + p.categories[0] + " on " + p.date->str() + "?";
    }
    return "?";
}

}  // namespace

std::vector<LedgerQuestion> generate_questions(const std::vector<Transaction>& ledger,
                                               std::uint64_t seed, int per_template_quota) {
    if (ledger.empty()) throw ValidationError("cannot generate questions over an empty ledger");
    Rng rng(seed);
    std::vector<LedgerQuestion> out;

    auto emit = [&](QuestionTemplate tmpl, QuestionParams params) {
        LedgerQuestion q;
        q.tmpl = tmpl;
        q.params = std::move(params);
        q.question = question_text(tmpl, q.params);
        q.answer = oracle_answer(ledger, tmpl, q.params);
        out.push_back(std::move(q));
    };

    // Realized material, in deterministic order.
    std::vector<Date> dates;
    for (const auto& t : ledger) dates.push_back(t.date);
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

    std::vector<std::string> all_categories = Taxonomy::standard().categories();

    // Range templates: anchor on a random transaction so the slice is never
    // empty, then widen to a random realized [from, to] around it.
    auto random_range_around = [&](const Date& anchor) {
        std::vector<Date> before, after;
        for (const auto& d : dates) {
            if (!(anchor < d)) before.push_back(d);
            if (!(d < anchor)) after.push_back(d);
        }
        return std::make_pair(rng.pick(before), rng.pick(after));
    };

    {  // TimeRangeSceneAmount
        std::set<std::string> seen;
        int emitted = 0;
        for (int attempt = 0; attempt < per_template_quota * 12 && emitted < per_template_quota;
             ++attempt) {
            const Transaction& anchor =
                ledger[static_cast<std::size_t>(rng.below(ledger.size()))];
            auto [from, to] = random_range_around(anchor.date);
            QuestionParams p;
            p.categories = {anchor.category};
            p.from = from;
            p.to = to;
            const std::string key = anchor.category + "|" + from.str() + "|" + to.str();
            if (!seen.insert(key).second) continue;
            emit(QuestionTemplate::TimeRangeSceneAmount, std::move(p));
            ++emitted;
        }
    }

    {  // TimeRangeMultiScene
        std::set<std::string> seen;
        int emitted = 0;
        for (int attempt = 0; attempt < per_template_quota * 12 && emitted < per_template_quota;
             ++attempt) {
            const Transaction& anchor =
                ledger[static_cast<std::size_t>(rng.below(ledger.size()))];
            auto [from, to] = random_range_around(anchor.date);
            const int extra = static_cast<int>(rng.uniform_int(1, 2));
            std::set<std::string> cats{anchor.category};
            while (static_cast<int>(cats.size()) < extra + 1) {
                cats.insert(rng.pick(all_categories));
            }
            QuestionParams p;
            p.categories.assign(cats.begin(), cats.end());
            p.from = from;
            p.to = to;
            std::string key = from.str() + "|" + to.str();
            for (const auto& c : p.categories) key += "|" + c;
            if (!seen.insert(key).second) continue;
            emit(QuestionTemplate::TimeRangeMultiScene, std::move(p));
            ++emitted;
        }
    }

    emit(QuestionTemplate::GlobalTotal, {});

    {  // MaxScene: only when the maximizer is unique
        std::map<std::string, Money> totals;
        for (const auto& t : ledger) totals[t.category] += t.amount;
        Money best;
        int best_count = 0;
        for (const auto& [cat, total] : totals) {
            if (total > best) {
                best = total;
                best_count = 1;
            } else if (total == best) {
                ++best_count;
            }
        }
        if (best_count == 1) emit(QuestionTemplate::MaxScene, {});
    }

    {  // MaxFrequencyDate
        std::map<Date, int> counts;
        for (const auto& t : ledger) ++counts[t.date];
        int best = 0, best_count = 0;
        for (const auto& [date, count] : counts) {
            if (count > best) {
                best = count;
                best_count = 1;
            } else if (count == best) {
                ++best_count;
            }
        }
        if (best_count == 1) emit(QuestionTemplate::MaxFrequencyDate, {});
    }

    {  // MaxSingleAmount
        Money best;
        int best_count = 0;
        for (const auto& t : ledger) {
            if (t.amount > best) {
                best = t.amount;
                best_count = 1;
            } else if (t.amount == best) {
                ++best_count;
            }
        }
        if (best_count == 1) emit(QuestionTemplate::MaxSingleAmount, {});
    }

    {  // PointQuery over realized (date, scene) pairs
        std::vector<std::pair<Date, std::string>> pairs;
        for (const auto& t : ledger) pairs.emplace_back(t.date, t.scene);
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        const std::size_t take =
            std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(per_template_quota));
        auto picks = rng.sample_distinct(pairs.size(), take);
        std::sort(picks.begin(), picks.end());
        for (auto i : picks) {
            QuestionParams p;
            p.date = pairs[i].first;
            p.scene = pairs[i].second;
            emit(QuestionTemplate::PointQuery, std::move(p));
        }
    }

    {  // SingleDateSceneAmount over realized (date, category) pairs
        std::vector<std::pair<Date, std::string>> pairs;
        for (const auto& t : ledger) pairs.emplace_back(t.date, t.category);
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        const std::size_t take =
            std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(per_template_quota));
        auto picks = rng.sample_distinct(pairs.size(), take);
        std::sort(picks.begin(), picks.end());
        for (auto i : picks) {
            QuestionParams p;
            p.date = pairs[i].first;
            p.categories = {pairs[i].second};
            emit(QuestionTemplate::SingleDateSceneAmount, std::move(p));
        }
    }

    return out;
}

// ---------------------------------------------------------------------------
// Dataset pipeline
// ---------------------------------------------------------------------------

LedgerSample generate_sample(const DatasetConfig& config, int sample_index) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(sample_index)));
    const Taxonomy& taxonomy = Taxonomy::standard();

    LedgerSample sample;
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "sample-%05d", sample_index);
        sample.sample_id = buf;
    }

    const auto timeline =
        sample_timeline(config.start, config.end, config.n_sessions, rng.next());
    for (const auto& date : timeline) {
        const auto intents = sample_scenes(taxonomy, rng);
        Session session = synthesize_session(date, intents, taxonomy, rng, config.mode,
                                             config.synthesis_provider);
        for (const auto& tx : session.transactions) sample.ledger.push_back(tx);
        sample.sessions.push_back(std::move(session));
    }

    sample.questions = generate_questions(sample.ledger, rng.next(), config.per_template_quota);

    if (config.diversify && config.mode == SynthesisMode::Llm && config.synthesis_provider) {
        for (auto& q : sample.questions) {
            const std::string prompt =
                "Paraphrase the following question without changing its meaning. Return only "
                "the paraphrased question.\n\nQuestion: " + q.question;
            try {
                const auto completion =
                    config.synthesis_provider->complete(prompt, Phase::QA);
                const auto rephrased = trim(completion.text);
                if (!rephrased.empty()) q.question = std::string(rephrased);
            } catch (const TransportError&) {
                // keep the canonical phrasing
            }
        }
    }
    return sample;
}

LedgerDataset generate_dataset(const DatasetConfig& config) {
    if (config.n_sessions <= 0) throw ValidationError("n_sessions must be positive");
    if (config.n_samples <= 0) throw ValidationError("n_samples must be positive");
    LedgerDataset dataset;
    dataset.samples.reserve(static_cast<std::size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i) {
        dataset.samples.push_back(generate_sample(config, i));
    }
    return dataset;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json transaction_to_json(const Transaction& t) {
    ordered_json j;
    j["date"] = t.date.str();
    j["category"] = t.category;
    j["scene"] = t.scene;
    j["amount"] = t.amount.str();
    j["description"] = t.description;
    return j;
}

Transaction transaction_from_json(const ordered_json& j) {
    Transaction t;
    auto date = Date::parse(j.at("date").get<std::string>());
    if (!date) throw ValidationError("bad transaction date");
    t.date = *date;
    t.category = j.at("category").get<std::string>();
    t.scene = j.at("scene").get<std::string>();
    auto amount = Money::parse(j.at("amount").get<std::string>());
    if (!amount) throw ValidationError("bad transaction amount");
    t.amount = *amount;
    t.description = j.value("description", "");
    return t;
}

ordered_json params_to_json(const QuestionParams& p) {
    ordered_json j = ordered_json::object();
    if (!p.categories.empty()) j["categories"] = p.categories;
    if (!p.scene.empty()) j["scene"] = p.scene;
    if (p.from) j["from"] = p.from->str();
    if (p.to) j["to"] = p.to->str();
    if (p.date) j["date"] = p.date->str();
    return j;
}

QuestionParams params_from_json(const ordered_json& j) {
    QuestionParams p;
    if (j.contains("categories")) {
        p.categories = j["categories"].get<std::vector<std::string>>();
    }
    p.scene = j.value("scene", "");
    if (j.contains("from")) p.from = Date::parse(j["from"].get<std::string>());
    if (j.contains("to")) p.to = Date::parse(j["to"].get<std::string>());
    if (j.contains("date")) p.date = Date::parse(j["date"].get<std::string>());
    return p;
}

}  // namespace

nlohmann::ordered_json sample_to_json(const LedgerSample& sample) {
    ordered_json j;
    j["sample_id"] = sample.sample_id;
    ordered_json sessions = ordered_json::array();
    for (const auto& s : sample.sessions) {
        ordered_json sj;
        sj["date"] = s.date.str();
        ordered_json turns = ordered_json::array();
        for (const auto& turn : s.dialogue) {
            turns.push_back({{"speaker", turn.speaker}, {"text", turn.text}});
        }
        sj["dialogue"] = std::move(turns);
        if (s.llm_fallback) sj["llm_fallback"] = true;
        sessions.push_back(std::move(sj));
    }
    j["sessions"] = std::move(sessions);

    ordered_json ledger = ordered_json::array();
    for (const auto& t : sample.ledger) ledger.push_back(transaction_to_json(t));
    j["ledger"] = std::move(ledger);

    ordered_json questions = ordered_json::array();
    for (const auto& q : sample.questions) {
        ordered_json qj;
        qj["template"] = std::string(template_name(q.tmpl));
        qj["question"] = q.question;
        qj["answer"] = q.answer;
        qj["params"] = params_to_json(q.params);
        questions.push_back(std::move(qj));
    }
    j["questions"] = std::move(questions);
    return j;
}

LedgerSample sample_from_json(const nlohmann::ordered_json& j) {
    LedgerSample sample;
    sample.sample_id = j.value("sample_id", "");
    for (const auto& sj : j.at("sessions")) {
        Session s;
        auto date = Date::parse(sj.at("date").get<std::string>());
        if (!date) throw ValidationError("bad session date");
        s.date = *date;
        for (const auto& turn : sj.at("dialogue")) {
            s.dialogue.push_back({turn.at("speaker").get<std::string>(),
                                  turn.at("text").get<std::string>()});
        }
        s.llm_fallback = sj.value("llm_fallback", false);
        sample.sessions.push_back(std::move(s));
    }
    for (const auto& tj : j.at("ledger")) sample.ledger.push_back(transaction_from_json(tj));
    for (const auto& qj : j.at("questions")) {
        LedgerQuestion q;
        auto tmpl = template_from_name(qj.at("template").get<std::string>());
        if (!tmpl) throw ValidationError("unknown question template in dataset");
        q.tmpl = *tmpl;
        q.question = qj.at("question").get<std::string>();
        q.answer = qj.at("answer").get<std::string>();
        if (qj.contains("params")) q.params = params_from_json(qj["params"]);
        sample.questions.push_back(std::move(q));
    }
    return sample;
}

std::string render_session_text(const Session& session) {
    std::string out = "Date: " + session.date.str();
    for (const auto& turn : session.dialogue) {
        out += "\n" + turn.speaker + ": " + turn.text;
    }
    return out;
}

EpisodeSample to_episode_sample(const LedgerSample& sample) {
    EpisodeSample out;
    out.sample_id = sample.sample_id;
    for (const auto& s : sample.sessions) out.context.push_back(render_session_text(s));
    for (const auto& q : sample.questions) {
        QuestionRecord rec;
        rec.question = q.question;
        rec.answer = q.answer;
        rec.metadata["template"] = std::string(template_name(q.tmpl));
        out.questions.push_back(std::move(rec));
    }
    return out;
}

void write_dataset_jsonl(std::ostream& out, const LedgerDataset& dataset) {
    for (const auto& sample : dataset.samples) {
        out << sample_to_json(sample).dump() << "\n";
    }
}

LedgerDataset read_dataset_jsonl(std::istream& in) {
    LedgerDataset dataset;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw ValidationError("dataset line " + std::to_string(line_no) +
                                  " is not valid JSON");
        }
        dataset.samples.push_back(sample_from_json(j));
    }
    return dataset;
}

}  // namespace uma
