// Regenerates the recorded transcripts under tests/data.
//   record_fixtures <tests/data>
#include "inspire/gateway.hpp"
#include "inspire/refinement.hpp"
#include "inspire/workspace.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace inspire;

namespace {

// Answers with one fixed list whatever the prompt.
class CannedProvider : public llm::ChatProvider {
public:
    explicit CannedProvider(std::string answer) : answer_(std::move(answer)) {}
    std::string complete(const llm::ChatRequest&) override { return answer_; }
    std::string id() const override { return "canned"; }

private:
    std::string answer_;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void record_laugh(const fs::path& out) {
    const io::json items = {
        {{"sub-feature", "Laugh Detection"}, {"description", "Recognise laughter in audio picked up by the microphone."}},
        {{"sub-feature", "Authenticity Assessment"}, {"description", "Tell spontaneous laughs from forced ones."}},
        {{"sub-feature", "Emotional Context Analysis"}, {"description", "Relate each laugh to the mood it occurred in."}},
        {{"sub-feature", "Social Interaction Impact"}, {"description", "Estimate how laughs affect conversations with others."}},
        {{"sub-feature", "Laugh Quantity Tracking"}, {"description", "Count laughs per day and show the trend."}},
    };
    CannedProvider provider("```json\n" + items.dump(2) + "\n```");
    fs::remove(out);
    llm::Transcript transcript(out);
    llm::Gateway gateway(provider, {}, &transcript);
    refinement::refine_llm_single({"Laugh Evaluation",
                                   "Continually tracks the laughs of a user, counts them and assesses their "
                                   "authenticity, emotional context and impact on social interactions."},
                                  5, gateway);
}

void record_sleep(const fs::path& data, const fs::path& out) {
    const auto scratch = fs::temp_directory_path() / "inspire-record-fixtures";
    fs::remove_all(scratch);
    service::WorkspaceOptions opts;
    opts.provider = service::ProviderKind::synthetic;
    opts.fixed_clock = std::string(service::kReplayTimestamp);
    service::Workspace ws(scratch, std::move(opts));
    ws.ingest(read_file(data / "apps.jsonl"));
    ws.build_index();
    service::TreeSpec spec;
    spec.root = {"Sleep Tracking", "Monitor how long and how well the user sleeps."};
    spec.approach = refinement::Approach::appstore;
    spec.generate = true;
    ws.create_tree(spec);
    fs::copy_file(ws.layout().transcript(), out, fs::copy_options::overwrite_existing);
    fs::remove_all(scratch);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: record_fixtures <tests/data>\n";
        return 64;
    }
    const fs::path data = argv[1];
    record_laugh(data / "laugh_evaluation.transcript.jsonl");
    record_sleep(data, data / "sleep_tracking_appstore.transcript.jsonl");
    std::cout << "wrote transcripts to " << data << "\n";
    return 0;
}
