#include "pipeline.hpp"

#include "common.hpp"
#include "fraud.hpp"
#include "imaging.hpp"
#include "render.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace idsynth {

const std::vector<std::string>& all_fraud_types() {
    static const std::vector<std::string> kTypes{
        "face_morph",  "portrait_substitution", "text_replacement",
        "mixed",       "inpaint_rewrite",       "crop_replace"};
    return kTypes;
}

std::string doc_id_for(int index) { return strprintf("doc_%05d", index); }

namespace {

struct UnitResult {
    std::vector<ManifestEntry> entries;  // appended this run, doc order
    int images = 0;
    int skipped = 0;
};

DocumentImage render_genuine(const TemplatePack& pack, const IdentityRecord& id,
                             const PortraitAsset& portrait) {
    std::map<std::string, cv::Mat> inputs;
    for (const FieldSpec* f : pack.fields_of_kind(FieldKind::portrait))
        inputs[f->id] = preprocess_portrait(portrait, *f).image;
    return render_document(pack, id, {}, inputs);
}

ManifestEntry base_entry(const std::string& base, const std::string& variant,
                         const TemplatePack& pack, const IdentityRecord& id, uint64_t seed) {
    ManifestEntry e;
    e.doc_id = variant == "genuine" ? base : base + "." + variant;
    e.base_id = base;
    e.variant = variant;
    e.image_path = pack.pack_id + "/" + base + "/" + variant + ".png";
    e.identity = id;
    e.seed = seed;
    e.pack_id = pack.pack_id;
    return e;
}

struct UnitContext {
    const RunConfig* cfg;
    const TemplatePack* pack;
    const std::vector<PortraitAsset>* qualified;
    const std::vector<PortraitAsset>* disqualified;
    const std::vector<IdentityRecord>* identities;
    const std::vector<uint64_t>* seeds;
    PoolProvider* pools;
    const std::set<std::string>* existing;
};

UnitResult build_unit(int i, const UnitContext& ctx) {
    const RunConfig& cfg = *ctx.cfg;
    const TemplatePack& pack = *ctx.pack;
    const IdentityRecord& identity = (*ctx.identities)[size_t(i)];
    const uint64_t seed = (*ctx.seeds)[size_t(i)];
    const std::string base = doc_id_for(i);
    const fs::path unit_dir = fs::path(cfg.out_dir) / pack.pack_id / base;

    // a sample is settled when its manifest line and its image both exist; a
    // missing image is rebuilt without duplicating the line
    auto settled = [&](const std::string& doc_id, const fs::path& img) {
        return ctx.existing->count(doc_id) > 0 && fs::exists(img);
    };

    UnitResult r;
    bool all_there = settled(base, unit_dir / "genuine.png");
    for (const auto& type : cfg.fraud_types)
        all_there = all_there && settled(base + "." + type, unit_dir / (type + ".png"));
    if (all_there) {
        r.skipped = 1 + int(cfg.fraud_types.size());
        return r;
    }

    fs::create_directories(unit_dir);
    const Rng doc_rng(seed);
    const DocumentImage doc = render_genuine(pack, identity, (*ctx.qualified)[size_t(i)]);
    if (settled(base, unit_dir / "genuine.png")) {
        ++r.skipped;
    } else {
        save_png((unit_dir / "genuine.png").string(), doc.pixels);
        ++r.images;
        if (ctx.existing->count(base) == 0)
            r.entries.push_back(base_entry(base, "genuine", pack, identity, seed));
    }

    FraudInputs in;
    in.pack = &pack;
    in.identity = identity;
    in.portrait = &(*ctx.qualified)[size_t(i)];
    in.qualified = ctx.qualified;
    in.disqualified = ctx.disqualified;
    in.pools = ctx.pools;
    in.now = cfg.now;

    for (const auto& type : cfg.fraud_types) {
        const fs::path img = unit_dir / (type + ".png");
        if (settled(base + "." + type, img)) {
            ++r.skipped;
            continue;
        }
        FraudRecord rec;
        DocumentImage variant;
        if (type == "face_morph") {
            Rng rng = doc_rng.child("fraud-face");
            MorphConfig mc;
            mc.blend = rng.uniform(kMorphWeightLo, kMorphWeightHi);
            variant = inject_face_morph(doc, in, mc, rng, rec);
        } else if (type == "portrait_substitution") {
            Rng rng = doc_rng.child("fraud-sub");
            variant = inject_portrait_substitution(doc, in, rng, rec);
        } else if (type == "text_replacement") {
            Rng rng = doc_rng.child("fraud-text");
            variant = inject_text_replacement(doc, in, "auto", rng, rec);
        } else if (type == "mixed") {
            // same stream as the plain text variant, so both text stages match
            Rng text = doc_rng.child("fraud-text");
            Rng face = doc_rng.child("fraud-mixed-face");
            variant = inject_mixed(doc, in, text, face, rec);
        } else if (type == "inpaint_rewrite") {
            Rng rng = doc_rng.child("fraud-inpaint");
            variant = inject_inpaint_rewrite(doc, in, rng, rec);
        } else if (type == "crop_replace") {
            const int j = (i + 1) % int(ctx.identities->size());
            const IdentityRecord& partner_id = (*ctx.identities)[size_t(j)];
            const DocumentImage partner =
                j == i ? doc : render_genuine(pack, partner_id, (*ctx.qualified)[size_t(j)]);
            Rng rng = doc_rng.child("fraud-crop");
            variant = inject_crop_replace(doc, identity, partner, partner_id, pack, rng, rec);
            rec.partner_doc_id = doc_id_for(j);
        } else {
            throw std::invalid_argument("unknown fraud type: " + type);
        }
        save_png(img.string(), variant.pixels);
        ++r.images;
        if (ctx.existing->count(base + "." + type) == 0) {
            ManifestEntry e = base_entry(base, type, pack, identity, seed);
            e.fraud = std::move(rec);
            r.entries.push_back(std::move(e));
        }
    }
    return r;
}

}  // namespace

RunSummary generate_dataset(const RunConfig& cfg) {
    if (cfg.count <= 0) throw std::invalid_argument("count must be positive");
    for (const auto& t : cfg.fraud_types) {
        const auto& known = all_fraud_types();
        if (std::find(known.begin(), known.end(), t) == known.end())
            throw std::invalid_argument("unknown fraud type: " + t);
    }

    const TemplatePack pack = load_template_pack(cfg.pack_dir);
    std::vector<PortraitAsset> qualified, disqualified;
    for (auto& p : load_portrait_dir(cfg.portrait_dir))
        (qualify_portrait(p).qualified ? qualified : disqualified).push_back(std::move(p));
    if (int(qualified.size()) < cfg.count)
        throw std::runtime_error(strprintf("insufficient qualified portraits: need %d, have %zu",
                                           cfg.count, qualified.size()));
    // documents use the first `count` portraits; the whole qualified pool
    // stays available as morph partners

    PoolProvider pools(cfg.provider);
    SharedPools shared(pack.dln_format);
    std::vector<uint64_t> seeds(size_t(cfg.count));
    std::vector<IdentityRecord> identities(size_t(cfg.count));
    for (int i = 0; i < cfg.count; ++i) {
        seeds[size_t(i)] = hash_combine(cfg.master_seed, uint64_t(i));
        Rng rng = Rng(seeds[size_t(i)]).child("identity");
        identities[size_t(i)] =
            build_identity(rng, qualified[size_t(i)], pack, pools, shared, cfg.now);
    }

    fs::create_directories(fs::path(cfg.out_dir) / pack.pack_id);
    const fs::path manifest_path = fs::path(cfg.out_dir) / "manifest.jsonl";
    std::set<std::string> existing;
    if (fs::exists(manifest_path)) {
        const ManifestReadResult prior = read_manifest(manifest_path.string());
        if (!prior.errors.empty())
            throw std::runtime_error("existing manifest is damaged: " + prior.errors.front());
        for (const auto& e : prior.entries) existing.insert(e.doc_id);
    }
    std::ofstream manifest(manifest_path, std::ios::app);
    if (!manifest) throw std::runtime_error("cannot open manifest: " + manifest_path.string());

    UnitContext ctx{&cfg,   &pack,  &qualified, &disqualified,
                    &identities, &seeds, &pools,     &existing};

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = std::min(cfg.threads > 0 ? cfg.threads : int(hw), cfg.count);

    const auto t0 = std::chrono::steady_clock::now();
    std::atomic<int> next{0};
    std::mutex mu;
    std::condition_variable cv;
    std::map<int, UnitResult> done;
    std::exception_ptr failure;

    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.count) return;
            {
                std::lock_guard<std::mutex> lk(mu);
                if (failure) return;
            }
            try {
                UnitResult r = build_unit(i, ctx);
                std::lock_guard<std::mutex> lk(mu);
                done.emplace(i, std::move(r));
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!failure) failure = std::current_exception();
            }
            cv.notify_one();
        }
    };
    std::vector<std::thread> crew;
    crew.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w) crew.emplace_back(work);

    RunSummary sum;
    sum.manifest_path = manifest_path.string();
    {
        // flush completed units in doc order so an interrupted run still
        // leaves a parseable manifest prefix
        std::unique_lock<std::mutex> lk(mu);
        int flushed = 0;
        while (flushed < cfg.count) {
            cv.wait(lk, [&] { return failure || done.count(flushed) > 0; });
            if (done.count(flushed) == 0) break;
            while (true) {
                auto it = done.find(flushed);
                if (it == done.end()) break;
                for (const auto& e : it->second.entries)
                    manifest << manifest_entry_to_json(e).dump() << "\n";
                manifest.flush();
                sum.images_written += it->second.images;
                sum.entries_appended += int(it->second.entries.size());
                sum.skipped_existing += it->second.skipped;
                ++sum.documents;
                done.erase(it);
                ++flushed;
            }
        }
    }
    for (auto& t : crew) t.join();
    if (failure) std::rethrow_exception(failure);
    sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sum;
}

}  // namespace idsynth
