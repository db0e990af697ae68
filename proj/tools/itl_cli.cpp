#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "itl/itl.hpp"

namespace fs = std::filesystem;
using itl::Json;

namespace {

struct TrainingFlags {
  double lr = 1e-4;
  int epochs = 300;
  int patience = 30;
  int batch = 1;
  std::uint64_t seed = 0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::string negatives = "all_pairs";
  double per_iteration_weight = 1.0;
  unsigned threads = 1;

  itl::TrainConfig train_config() const {
    itl::TrainConfig c;
    c.lr = lr;
    c.max_epochs = epochs;
    c.early_stop_patience = patience;
    c.batch = batch;
    c.seed = seed;
    c.eval_threads = threads;
    return c;
  }
  itl::LossConfig loss_config() const {
    itl::LossConfig c;
    c.lambda1 = lambda1;
    c.lambda2 = lambda2;
    c.negative_policy = itl::parse_negative_policy(negatives);
    c.per_iteration_weight = per_iteration_weight;
    return c;
  }
};

void add_training_flags(CLI::App* sub, TrainingFlags& f) {
  sub->add_option("--lr", f.lr, "Base Adam learning rate")->capture_default_str();
  sub->add_option("--epochs", f.epochs, "Maximum number of epochs")->capture_default_str();
  sub->add_option("--patience", f.patience, "Early-stopping patience in epochs")->capture_default_str();
  sub->add_option("--batch", f.batch, "Graphs per optimizer step")->capture_default_str();
  sub->add_option("--seed", f.seed, "Seed for initialization, shuffling and observation splits")->capture_default_str();
  sub->add_option("--lambda1", f.lambda1, "Wall loss weight")->capture_default_str();
  sub->add_option("--lambda2", f.lambda2, "Spatial loss weight")->capture_default_str();
  sub->add_option("--negatives", f.negatives, "Negative pairs in the loss")
      ->check(CLI::IsMember({"all_pairs", "balanced_sample"}))
      ->capture_default_str();
  sub->add_option("--per-iteration-weight", f.per_iteration_weight, "Weight of the intermediate-topology loss terms")
      ->capture_default_str();
  sub->add_option("--threads", f.threads, "Worker threads for evaluation")->check(CLI::Range(1u, 256u))->capture_default_str();
}

void add_data_flag(CLI::App* sub, std::string& data) {
  sub->add_option("--data", data, "Corpus directory (default from ITL_DATA_DIR)")->envname("ITL_DATA_DIR")->required();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw itl::Error(itl::ErrorKind::io, "cannot create directory '" + dir + "': " + ec.message());
}

/// The fully resolved flags of `sub`, in the same format `--config` reads.
void write_resolved_config(const CLI::App* sub, const std::string& dir) {
  itl::write_text_file(dir + "/resolved_config.ini", "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false));
}

std::uint64_t observation_seed(std::uint64_t seed) { return itl::mix_seed(seed, 0x5eed); }

const std::vector<itl::CorpusRecord>& pick_split(const itl::Corpus& c, const std::string& name,
                                                 std::vector<itl::CorpusRecord>& scratch) {
  if (name != "all") return c.split(name);
  scratch.clear();
  for (const auto* s : {&c.train, &c.val, &c.test}) scratch.insert(scratch.end(), s->begin(), s->end());
  return scratch;
}

void print_epoch(const std::string& tag, const itl::EpochRecord& r) {
  if (r.epoch != 1 && r.epoch % 10 != 0) return;
  const auto& m = r.val;
  std::cout << tag << "epoch " << std::setw(3) << r.epoch << "  lr " << r.lr << "  loss " << std::fixed << std::setprecision(5)
            << r.train_loss << "  val AUC spatial " << itl::format_metric(m.pooled_for(itl::Relation::spatial).auc, m.pooled_for(itl::Relation::spatial).auc_defined, 4)
            << " wall " << itl::format_metric(m.pooled_for(itl::Relation::wall).auc, m.pooled_for(itl::Relation::wall).auc_defined, 4)
            << " door " << itl::format_metric(m.pooled_for(itl::Relation::door).auc, m.pooled_for(itl::Relation::door).auc_defined, 4)
            << std::defaultfloat << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative topology learning for floorplans: synthetic corpora, training, evaluation and prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file; [subcommand] sections set flags, command-line flags win");

  // synth
  std::size_t synth_count = 400;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  unsigned synth_threads = 1;
  itl::GenParams gen;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic floorplan corpus");
  synth->add_option("--count", synth_count, "Number of plans")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Corpus seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--min-rooms", gen.min_rooms, "Minimum rooms per plan")->capture_default_str();
  synth->add_option("--max-rooms", gen.max_rooms, "Maximum rooms per plan")->capture_default_str();
  synth->add_option("--extra-door-prob", gen.extra_door_prob, "Base probability of a door beyond the spanning tree")
      ->capture_default_str();
  synth->add_option("--grid-w", gen.grid_w, "Grid width in cells")->capture_default_str();
  synth->add_option("--grid-h", gen.grid_h, "Grid height in cells")->capture_default_str();
  synth->add_option("--threads", synth_threads, "Worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();

  // train
  std::string train_data, train_task = "generate", train_sets = "1,2,3", train_out, train_variant = "full",
                          train_nonlin = "elu";
  double train_observe = 0.5;
  itl::ItlConfig model_cfg;
  TrainingFlags train_flags;
  bool train_quiet = false;
  auto* train = app.add_subcommand("train", "Train a model on a corpus");
  add_data_flag(train, train_data);
  train->add_option("--task", train_task, "generate or complete")->check(CLI::IsMember({"generate", "complete"}))->capture_default_str();
  train->add_option("--observe-frac", train_observe, "Observed share of spatial edges (complete task)")->capture_default_str();
  train->add_option("--variant", train_variant, "Model variant")
      ->check(CLI::IsMember({"full", "no_il", "no_mr_gat", "no_mr_decoder", "mlp", "gat_knn"}))
      ->capture_default_str();
  train->add_option("--k", model_cfg.k_iterations, "Topology iterations")->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--sets", train_sets, "Attribute sets, e.g. 1,2,3")->capture_default_str();
  train->add_option("--hidden", model_cfg.gat_hidden, "Node embedding width")->capture_default_str();
  train->add_option("--share-weights", model_cfg.share_block_weights, "One set of block weights for every iteration")
      ->capture_default_str();
  train->add_option("--long-skip", model_cfg.long_skip, "Concatenate input features into the decoder")->capture_default_str();
  train->add_option("--nonlinearity", train_nonlin, "elu, relu or tanh")->check(CLI::IsMember({"elu", "relu", "tanh"}))->capture_default_str();
  train->add_option("--knn-k", model_cfg.knn_k, "Neighbours for the gat_knn baseline")->capture_default_str();
  add_training_flags(train, train_flags);
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_flag("--quiet", train_quiet, "No per-epoch progress");

  // eval
  std::string eval_ckpt, eval_data, eval_task = "generate", eval_split = "test", eval_report;
  double eval_observe = 0.5;
  std::uint64_t eval_seed = 0;
  unsigned eval_threads = 1;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a corpus split");
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint JSON")->required();
  add_data_flag(eval, eval_data);
  eval->add_option("--task", eval_task, "generate or complete")->check(CLI::IsMember({"generate", "complete"}))->capture_default_str();
  eval->add_option("--split", eval_split, "train, val, test or all")->check(CLI::IsMember({"train", "val", "test", "all"}))->capture_default_str();
  eval->add_option("--observe-frac", eval_observe, "Observed share of spatial edges (complete task)")->capture_default_str();
  eval->add_option("--seed", eval_seed, "Seed of the observation split (match training)")->capture_default_str();
  eval->add_option("--report", eval_report, "Directory for metrics.csv and metrics.txt");
  eval->add_option("--threads", eval_threads, "Worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();

  // predict
  std::string pred_ckpt, pred_floorplan, pred_json, pred_dot;
  double pred_threshold = 0.5;
  auto* predict = app.add_subcommand("predict", "Predict the topology of one floorplan");
  predict->add_option("--ckpt", pred_ckpt, "Checkpoint JSON")->required();
  predict->add_option("--floorplan", pred_floorplan, "Floorplan JSON")->required();
  predict->add_option("--threshold", pred_threshold, "Edge threshold on probabilities")->capture_default_str();
  predict->add_option("--out-json", pred_json, "Graph JSON with probabilities (stdout when neither output is given)");
  predict->add_option("--out-dot", pred_dot, "Graphviz DOT file");

  // gradcheck
  std::uint64_t gc_seed = 0;
  std::string gc_corrupt;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the full model gradient");
  gradcheck->add_option("--seed", gc_seed, "Fixture seed")->capture_default_str();
  gradcheck->add_option("--corrupt", gc_corrupt, "Test hook: perturb analytic gradients of tensors with this name prefix")
      ->group("");

  // grid
  std::string grid_data, grid_preset = "table2", grid_out, grid_only;
  TrainingFlags grid_flags;
  auto* grid = app.add_subcommand("grid", "Run an experiment grid and write a results CSV");
  add_data_flag(grid, grid_data);
  std::vector<std::string> presets = itl::grid_preset_names();
  grid->add_option("--preset", grid_preset, "Experiment grid")->check(CLI::IsMember(presets))->capture_default_str();
  grid->add_option("--only", grid_only, "Comma-separated experiment ids to keep");
  add_training_flags(grid, grid_flags);
  grid->add_option("--out", grid_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      const itl::Corpus corpus = itl::generate_corpus(synth_count, gen, synth_seed, synth_threads);
      itl::write_corpus(corpus, synth_out);
      write_resolved_config(synth, synth_out);
      std::cout << itl::statistics_report(corpus);
      return 0;
    }

    if (*train) {
      model_cfg.variant = itl::parse_variant(train_variant);
      model_cfg.nonlinearity = itl::parse_nonlinearity(train_nonlin);
      model_cfg.k_iterations = model_cfg.effective_k();
      model_cfg.validate();
      const itl::TaskKind task = itl::parse_task(train_task);
      const itl::AttributeSelection sets = itl::AttributeSelection::parse(train_sets);
      const itl::TrainConfig tc = train_flags.train_config();
      const itl::LossConfig lc = train_flags.loss_config();
      tc.validate();
      lc.validate();
      const itl::Corpus corpus = itl::read_corpus(train_data);
      const itl::StandardizationStats stats = itl::training_stats(corpus.train, sets);
      std::size_t skipped = 0;
      const auto tr = itl::make_instances(corpus.train, task, sets, stats, train_observe, observation_seed(tc.seed), &skipped);
      const auto va = itl::make_instances(corpus.val, task, sets, stats, train_observe, observation_seed(tc.seed), &skipped);
      if (skipped > 0) std::cerr << "note: skipped " << skipped << " plans with fewer than two spatial edges\n";
      ensure_dir(train_out);
      write_resolved_config(train, train_out);
      itl::write_json_file(train_out + "/config.json",
                           Json{{"task", itl::task_name(task)}, {"observe_frac", train_observe}, {"sets", sets.to_string()},
                                {"data", train_data}, {"model", itl::to_json(model_cfg)}, {"loss", itl::to_json(lc)},
                                {"train", itl::to_json(tc)}},
                           2);
      itl::EpochCallback cb;
      if (!train_quiet) cb = [](const itl::EpochRecord& r) { print_epoch("", r); };
      const itl::TrainResult res = itl::train(tr, va, model_cfg, lc, tc, stats, cb);
      itl::save_checkpoint(res.checkpoint, train_out + "/checkpoint.json");
      itl::write_json_file(train_out + "/history.json", itl::to_json(res.history), 1);
      std::cout << "best epoch " << res.history.best_epoch << " (val spatial AUC " << res.history.best_val_spatial_auc
                << ")" << (res.history.stopped_early ? ", stopped early" : "") << "\n";
      return 0;
    }

    if (*eval) {
      const itl::Checkpoint ckpt = itl::load_checkpoint(eval_ckpt);
      const itl::TaskKind task = itl::parse_task(eval_task);
      const itl::Corpus corpus = itl::read_corpus(eval_data);
      std::vector<itl::CorpusRecord> scratch;
      const auto& records = pick_split(corpus, eval_split, scratch);
      const itl::AttributeSelection sets = ckpt.sets();
      for (const auto& r : records) {
        if (itl::select_sets(r.features, sets).layout != ckpt.feature_layout) {
          throw itl::Error(itl::ErrorKind::incompatible, "feature layout of '" + r.floorplan.id + "' does not match the checkpoint");
        }
      }
      const auto instances = itl::make_instances(records, task, sets, ckpt.standardization, eval_observe, observation_seed(eval_seed));
      const itl::EvalReport rep = itl::evaluate(instances, ckpt.params, ckpt.config, eval_threads);
      const std::string table = "pooled\n" + itl::metrics_table({{itl::variant_name(ckpt.config.variant), rep}}, true) +
                                "\nmacro\n" + itl::metrics_table({{itl::variant_name(ckpt.config.variant), rep}}, false);
      std::cout << table;
      if (!eval_report.empty()) {
        ensure_dir(eval_report);
        itl::write_text_file(eval_report + "/metrics.csv", itl::metrics_csv(rep));
        itl::write_text_file(eval_report + "/metrics.txt", table);
        write_resolved_config(eval, eval_report);
      }
      return 0;
    }

    if (*predict) {
      const itl::Checkpoint ckpt = itl::load_checkpoint(pred_ckpt);
      const itl::Floorplan fp = itl::floorplan_from_json(itl::read_json_file(pred_floorplan));
      itl::FeatureConfig fc;
      fc.sets = ckpt.sets();
      std::optional<itl::Tensor> image;
      if (fc.sets.has(itl::AttributeSet::image)) {
        itl::Rng rng(itl::mix_seed(itl::hash_string(fp.id), 4));
        image = itl::synthetic_image_features(fp, rng);
      }
      itl::FeatureMatrix fm = itl::assemble_features(fp, fc, image).matrix;
      if (fm.layout != ckpt.feature_layout) throw itl::Error(itl::ErrorKind::incompatible, "floorplan features do not match the checkpoint layout");
      itl::apply_standardization(fm, ckpt.standardization);
      const itl::TaskInstance inst = itl::make_generation_instance(fp.id, fm, itl::MultiAdjacency(fp.rooms.size()));
      const itl::model::EdgePredictions pred = itl::model::predict(inst, ckpt.params, ckpt.config);
      const itl::MultiAdjacency probs = pred.as_adjacency();
      std::vector<std::string> types;
      for (const auto& room : fp.rooms) types.push_back(room.type);
      Json out = itl::graph_to_json(probs, pred_threshold, &probs);
      out["floorplan_id"] = fp.id;
      out["threshold"] = pred_threshold;
      out["node_types"] = types;
      if (pred_json.empty() && pred_dot.empty()) std::cout << out.dump(1) << "\n";
      if (!pred_json.empty()) itl::write_json_file(pred_json, out, 1);
      if (!pred_dot.empty()) itl::write_text_file(pred_dot, itl::to_dot(probs, types, pred_threshold, fp.id));
      return 0;
    }

    if (*gradcheck) {
      std::function<void(itl::ParamSet&)> corrupt;
      if (!gc_corrupt.empty()) {
        corrupt = [&](itl::ParamSet& g) {
          for (auto& [name, t] : g)
            if (name.rfind(gc_corrupt, 0) == 0)
              for (std::size_t i = 0; i < t.size(); ++i) t[i] += 1e-2 * (1.0 + std::abs(t[i]));
        };
      }
      const itl::GradCheckReport rep = itl::model_grad_check(gc_seed, corrupt);
      std::cout << "parameter group                  max rel. error\n";
      for (const auto& [group, err] : itl::group_errors(rep)) {
        std::cout << std::left << std::setw(32) << group << " " << std::scientific << std::setprecision(3) << err << "\n";
      }
      std::cout << std::defaultfloat << "entries checked " << rep.evaluated << ", worst " << rep.worst_param << "["
                << rep.worst_index << "] = " << rep.max_rel_error << "\n";
      if (rep.max_rel_error < 1e-4) {
        std::cout << "PASS\n";
        return 0;
      }
      std::cout << "FAIL: max relative error " << rep.max_rel_error << " >= 1e-4 in " << rep.worst_param << "\n";
      return 1;
    }

    if (*grid) {
      const itl::TrainConfig tc = grid_flags.train_config();
      const itl::LossConfig lc = grid_flags.loss_config();
      tc.validate();
      lc.validate();
      itl::GridSpec spec = itl::grid_preset(grid_preset);
      spec.train = tc;
      for (auto& e : spec.experiments) {
        // The sensitivity preset sweeps the lambdas itself.
        const itl::LossConfig own = e.loss;
        e.loss = lc;
        if (grid_preset == "sensitivity") {
          e.loss.lambda1 = own.lambda1;
          e.loss.lambda2 = own.lambda2;
        }
      }
      if (!grid_only.empty()) {
        std::vector<itl::ExperimentSpec> kept;
        std::stringstream ss(grid_only);
        std::string id;
        std::vector<std::string> wanted;
        while (std::getline(ss, id, ',')) wanted.push_back(id);
        for (const auto& w : wanted) {
          auto it = std::find_if(spec.experiments.begin(), spec.experiments.end(), [&](const auto& e) { return e.id == w; });
          if (it == spec.experiments.end()) throw itl::invalid_input("grid '" + grid_preset + "' has no experiment '" + w + "'");
          kept.push_back(*it);
        }
        spec.experiments = kept;
      }
      const itl::Corpus corpus = itl::read_corpus(grid_data);
      ensure_dir(grid_out + "/histories");
      write_resolved_config(grid, grid_out);
      const itl::GridResult res = itl::run_experiment_grid(corpus, spec, [](const std::string& id, const itl::EpochRecord& r) {
        print_epoch("[" + id + "] ", r);
      });
      itl::write_text_file(grid_out + "/results.csv", itl::results_csv(res.rows));
      itl::write_text_file(grid_out + "/table.txt", itl::grid_table(res));
      for (const auto& o : res.outcomes) itl::write_json_file(grid_out + "/histories/" + o.spec.id + ".json", itl::to_json(o.history), 1);
      std::cout << itl::grid_table(res);
      return 0;
    }
  } catch (const itl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return itl::exit_code(e.kind());
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
