"""Experiment runner tying the pieces together.

Subcommands:
  run               train one optimizer (oracle or proxy-finetune mode)
  ablate-horizon    episode-length ablation at T=L_s, T=5*L_s, and infinite
  mismatch          train against a decoy twin landscape, log true oracle
  evaluate          score + multi-objective metrics for sequence files
  serve-echo-oracle test double speaking the remote-scorer wire protocol

Configuration comes from an optional TOML file whose sections mirror the
defaults below; command-line flags override file values, and the fully
resolved configuration is echoed into every manifest.
"""

from __future__ import annotations

import argparse
import copy
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import biophys as bp
from .agents import (DQNConfig, GFNConfig, MCMCRunConfig, PPOConfig,
                     ProxyContext, RNDConfig, run_agent)
from .core import AMINO_ACIDS, Alphabet
from .env import EnvConfig
from .io import (FastaRecord, format_cell, read_fasta, read_pdb_ca, write_csv,
                 write_fasta, write_run_manifest)
from .metrics import (ParetoPoint, aa_frequency, distribution_mae, mp_hd,
                      mp_rmsd, mp_tm, pareto_front)
from .oracle import PottsLandscape, PottsScorer, Scorer, twin_landscapes
from .proxy import FinetuneSchedule, ProxyModel, make_pretrain_corpus, pretrain
from .remote import EchoOracleServer, RemoteScorer

DEFAULTS: dict = {
    "run": {
        "mode": "oracle",            # oracle | proxy
        "agent": "ppo",
        "seeds": [1, 2, 3],
        "budget": 20_000,
        "oracle": "synthetic:0",     # synthetic:SEED | remote:HOST:PORT
        "out": "runs/out",
        "threshold": 0.5,
        "archive_capacity": 100,
    },
    "env": {
        "seq_len": 50,
        "alphabet": AMINO_ACIDS,
        "batch_size": 100,
        "episode_len": 0,            # 0 = infinite horizon
    },
    "ppo": {"gamma": 0.99, "gae_lambda": 0.95, "clip_eps": 0.2,
            "entropy_coef": 0.01, "value_coef": 0.5, "rollout_steps": 128,
            "epochs": 4, "minibatches": 8, "lr": 3e-4, "hidden": [128, 128]},
    "dqn": {"gamma": 0.99, "capacity": 100_000, "batch_size": 256,
            "target_sync": 1000, "eps_start": 1.0, "eps_end": 0.05,
            "eps_decay_frac": 0.2, "lr": 1e-4, "warmup": 512,
            "hidden": [128, 128], "huber_delta": 1.0},
    "gfn": {"beta": 32.0, "lr": 1e-3, "hidden": [128, 128],
            "capacity": 100_000, "batch_size": 256, "warmup": 256,
            "explore_eps": 0.05, "updates_per_step": 1},
    "rnd": {"embed_dim": 32, "hidden": 64, "lr": 1e-3, "bonus_coef": 0.05},
    "mcmc": {"t_start": 1.0, "t_end": 0.01},
    "proxy": {"param_budget": 15_000, "hidden2": 32, "pretrain_size": 1024,
              "pretrain_epochs": 30, "pretrain_lr": 1e-3},
    "finetune": {"interval": 2000, "top_k": 100, "epochs": 50, "lr": 1e-3},
    "evaluate": {"reference_csv": "", "aa_reference_csv": "", "traces_dir": ""},
}

CURVE_COLUMNS = ["queries", "mean_score", "mean_oracle_score", "temperature", "epsilon"]


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in out:
            raise SystemExit(f"unknown config key: {key}")
        if isinstance(value, dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def resolve_config(config_path: str | None, overrides: dict) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if config_path:
        with open(config_path, "rb") as fh:
            cfg = _merge(cfg, tomllib.load(fh))
    return _merge(cfg, overrides)


def _flag_overrides(args: argparse.Namespace) -> dict:
    over: dict = {"run": {}, "env": {}, "gfn": {}}
    mapping = {
        "mode": ("run", "mode"), "agent": ("run", "agent"),
        "budget": ("run", "budget"), "oracle": ("run", "oracle"),
        "out": ("run", "out"), "threshold": ("run", "threshold"),
        "seq_len": ("env", "seq_len"), "batch_size": ("env", "batch_size"),
        "episode_len": ("env", "episode_len"), "beta": ("gfn", "beta"),
    }
    for attr, (section, key) in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            over[section][key] = value
    if getattr(args, "seed", None):
        over["run"]["seeds"] = list(args.seed)
    return {k: v for k, v in over.items() if v}


def make_env_config(cfg: dict, episode_len: int | None = "unset") -> EnvConfig:
    env = cfg["env"]
    t = env["episode_len"] if episode_len == "unset" else episode_len
    return EnvConfig(
        seq_len=env["seq_len"],
        alphabet=Alphabet(tuple(env["alphabet"])),
        batch_size=env["batch_size"],
        episode_len=None if not t else int(t),
    )


def make_scorer(cfg: dict, alphabet: Alphabet) -> Scorer:
    """Fresh scorer instance (fresh query counters) from run.oracle spec."""
    spec = cfg["run"]["oracle"]
    kind, _, rest = spec.partition(":")
    if kind == "synthetic":
        seed = int(rest or 0)
        return PottsScorer(PottsLandscape(cfg["env"]["seq_len"], alphabet.size, seed))
    if kind == "remote":
        return RemoteScorer(rest, alphabet)
    raise SystemExit(f"unknown oracle spec {spec!r} (use synthetic:SEED or remote:HOST:PORT)")


def agent_config_from(cfg: dict, kind: str):
    if kind in ("ppo", "ppo-rnd"):
        p = dict(cfg["ppo"])
        p["hidden"] = tuple(p["hidden"])
        ppo = PPOConfig(**p)
        if kind == "ppo":
            return ppo
        return (ppo, RNDConfig(**cfg["rnd"]))
    if kind == "dqn":
        d = dict(cfg["dqn"])
        d["hidden"] = tuple(d["hidden"])
        return DQNConfig(**d)
    if kind == "gfn":
        g = dict(cfg["gfn"])
        g["hidden"] = tuple(g["hidden"])
        return GFNConfig(**g)
    if kind == "mcmc":
        return MCMCRunConfig(**cfg["mcmc"])
    return None


def _curve_schema(curves: list[dict]) -> list[str]:
    present = set()
    for row in curves:
        present.update(row)
    return [c for c in CURVE_COLUMNS if c in present]


def _write_curves(curves: list[dict], path: Path) -> None:
    write_csv(curves, _curve_schema(curves) or CURVE_COLUMNS[:2], path)


def _sequences_to_strings(batch: np.ndarray, alphabet: Alphabet) -> list[str]:
    return ["".join(alphabet.symbols[r] for r in row) for row in batch]


def _biophys_rows(strings: list[str]) -> list[bp.BiophysReport] | None:
    if any(c not in bp.AA_MASS for s in strings for c in s):
        return None  # non-canonical alphabet: biophysical panel undefined
    return [bp.biophys_report(s) for s in strings]


def _final_metrics(result, alphabet: Alphabet, label: str) -> dict:
    row = {"label": label, "status": result.status,
           "mean_score_final": float(np.mean(result.final_scores)) if result.final_scores.size else "",
           "best_archive_score": result.best_score}
    batch = result.final_batch
    if batch.shape[0] >= 2:
        row["mp_hd_final"] = mp_hd(batch)
    archive_seqs = result.archive.sequences()
    if archive_seqs.shape[0] >= 2:
        row["mp_hd_archive"] = mp_hd(archive_seqs)
    if batch.shape[0] >= 1:
        reports = _biophys_rows(_sequences_to_strings(batch, alphabet))
        if reports:
            arr = np.stack([r.as_array() for r in reports])
            for i, name in enumerate(bp.FEATURE_NAMES):
                row[f"mean_{name}"] = float(arr[:, i].mean())
    return row


METRIC_COLUMNS = ["label", "status", "mean_score_final", "best_archive_score",
                  "mp_hd_final", "mp_hd_archive",
                  "mean_w_mol", "mean_instability", "mean_pi", "mean_gravy"]


def _setup_proxy(cfg: dict, env_cfg: EnvConfig, oracle: Scorer, seed: int):
    """Pretrain a fresh proxy for one seed; returns (proxy, context, ledger)."""
    pcfg = cfg["proxy"]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 17]))
    proxy = ProxyModel(env_cfg.seq_len, env_cfg.alphabet.size, rng,
                       param_budget=pcfg["param_budget"], hidden2=pcfg["hidden2"])
    before = oracle.queries
    corpus_x, corpus_y = make_pretrain_corpus(
        oracle, env_cfg.seq_len, env_cfg.alphabet.size, pcfg["pretrain_size"], rng)
    pretrain(proxy, corpus_x, corpus_y, epochs=pcfg["pretrain_epochs"], rng=rng,
             lr=pcfg["pretrain_lr"])
    corpus_queries = oracle.queries - before
    schedule = FinetuneSchedule(**cfg["finetune"])
    ctx = ProxyContext(proxy=proxy, oracle=oracle, schedule=schedule, rng=rng)
    ledger = {"oracle_pretrain_corpus_queries": corpus_queries,
              "pretrain_corpus_size": int(corpus_x.shape[0]),
              "proxy_n_params": proxy.n_params}
    return proxy, ctx, ledger


def _run_one_seed(cfg: dict, seed: int, out_dir: Path, kind: str,
                  env_cfg: EnvConfig, shadow_factory=None) -> tuple:
    mode = cfg["run"]["mode"]
    oracle = make_scorer(cfg, env_cfg.alphabet)
    shadow = shadow_factory() if shadow_factory else None
    extra_ledger = {}
    if mode in ("proxy", "proxy-finetune"):
        proxy, ctx, extra_ledger = _setup_proxy(cfg, env_cfg, oracle, seed)
        driving: Scorer = proxy
        proxy_ctx = ctx
    elif mode == "oracle":
        driving, proxy_ctx = oracle, None
    else:
        raise SystemExit(f"unknown run.mode {mode!r}")

    result = run_agent(kind, env_cfg, driving, cfg["run"]["budget"], seed,
                       agent_config=agent_config_from(cfg, kind),
                       proxy_ctx=proxy_ctx, shadow_scorer=shadow,
                       archive_capacity=cfg["run"]["archive_capacity"])
    result.ledger.update(extra_ledger)

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_curves(result.curves, out_dir / "curves.csv")
    metric_row = _final_metrics(result, env_cfg.alphabet, f"{kind}-seed{seed}")
    write_csv([metric_row], METRIC_COLUMNS, out_dir / "metrics.csv")
    _pareto_outputs(_run_points(metric_row, kind, seed), "mp_hd",
                    cfg["run"]["threshold"], out_dir / "pareto_mp_hd.csv")
    if result.correlation is not None:
        write_csv([{"oracle_queries": q, "pearson_r": r}
                   for q, r in result.correlation.entries],
                  ["oracle_queries", "pearson_r"], out_dir / "correlation.csv")
        proxy_ctx.proxy.net.save(out_dir / "proxy_checkpoint.json")
    manifest = {"config": cfg, "status": result.status, "ledger": result.ledger,
                "experiment": mode}
    write_run_manifest(manifest, seed, out_dir / "manifest.json")
    _write_archive_fasta(result, env_cfg.alphabet, out_dir)
    return result, oracle


def _run_points(metric_row: dict, kind: str, seed: int) -> list[ParetoPoint]:
    points = []
    if isinstance(metric_row.get("mp_hd_final"), float) and \
            metric_row["mean_score_final"] != "":
        points.append(ParetoPoint(metric_row["mean_score_final"],
                                  metric_row["mp_hd_final"],
                                  f"{kind}-seed{seed}-final"))
    if isinstance(metric_row.get("mp_hd_archive"), float):
        points.append(ParetoPoint(metric_row["best_archive_score"],
                                  metric_row["mp_hd_archive"],
                                  f"{kind}-seed{seed}-archive"))
    return points


def _write_archive_fasta(result, alphabet: Alphabet, out_dir: Path) -> None:
    records = [FastaRecord(id=f"rank{i}_score{format_cell(score)}",
                           sequence="".join(alphabet.symbols[r] for r in seq))
               for i, (seq, score) in enumerate(result.archive.top())]
    if records:
        write_fasta(records, out_dir / "archive.fasta")
    finals = [FastaRecord(id=f"final{i}", sequence=s)
              for i, s in enumerate(_sequences_to_strings(result.final_batch, alphabet))]
    if finals:
        write_fasta(finals, out_dir / "final_batch.fasta")


def _aggregate_curves(per_seed: list[list[dict]], out_path: Path) -> None:
    n_rows = min(len(c) for c in per_seed)
    rows = []
    for i in range(n_rows):
        queries = per_seed[0][i]["queries"]
        scores = np.array([c[i]["mean_score"] for c in per_seed])
        row = {"queries": queries, "mean_score_mean": float(scores.mean()),
               "mean_score_std": float(scores.std())}
        oracle_vals = [c[i]["mean_oracle_score"] for c in per_seed
                       if "mean_oracle_score" in c[i]]
        if len(oracle_vals) == len(per_seed):
            ov = np.array(oracle_vals)
            row["mean_oracle_score_mean"] = float(ov.mean())
            row["mean_oracle_score_std"] = float(ov.std())
        rows.append(row)
    write_csv(rows, ["queries", "mean_score_mean", "mean_score_std",
                     "mean_oracle_score_mean", "mean_oracle_score_std"], out_path)


def _aggregate_metrics(rows: list[dict], out_path: Path) -> None:
    agg = {"label": "aggregate", "status": "ok"}
    for col in METRIC_COLUMNS[2:]:
        vals = [r[col] for r in rows if isinstance(r.get(col), (int, float))]
        if vals:
            agg[col] = float(np.mean(vals))
            agg[col + "_std"] = float(np.std(vals))
    schema = ["label", "status"]
    for col in METRIC_COLUMNS[2:]:
        if col in agg:
            schema.extend([col, col + "_std"])
    write_csv([agg], schema, out_path)


def _pareto_outputs(points: list[ParetoPoint], metric: str, threshold: float,
                    out_path: Path, lower_better: bool = False) -> None:
    oriented = [ParetoPoint(p.score, -p.diversity if lower_better else p.diversity,
                            p.label) for p in points]
    front_labels = {p.label for p in pareto_front(oriented, threshold)}
    rows = [{"label": p.label, "score": p.score, metric: p.diversity,
             "on_front": int(p.label in front_labels)} for p in points]
    write_csv(rows, ["label", "score", metric, "on_front"], out_path)


def cmd_run(cfg: dict) -> int:
    kind = cfg["run"]["agent"]
    env_cfg = make_env_config(cfg)
    out_root = Path(cfg["run"]["out"])
    per_seed_curves, metric_rows, points = [], [], []
    status_ok = True
    for seed in cfg["run"]["seeds"]:
        result, _ = _run_one_seed(cfg, seed, out_root / f"seed_{seed}", kind, env_cfg)
        status_ok = status_ok and result.status == "ok"
        per_seed_curves.append(result.curves)
        row = _final_metrics(result, env_cfg.alphabet, f"{kind}-seed{seed}")
        metric_rows.append(row)
        points.extend(_run_points(row, kind, seed))
        print(f"seed {seed}: status={result.status} "
              f"best={result.best_score:.4f} ledger={result.ledger}")

    out_root.mkdir(parents=True, exist_ok=True)
    _aggregate_curves(per_seed_curves, out_root / "aggregate_curves.csv")
    _aggregate_metrics(metric_rows, out_root / "aggregate_metrics.csv")
    _pareto_outputs(points, "mp_hd", cfg["run"]["threshold"],
                    out_root / "pareto_mp_hd.csv")
    write_run_manifest({"config": cfg, "experiment": cfg["run"]["mode"]},
                       seed=-1, target=out_root / "manifest.json")
    return 0 if status_ok else 1


def cmd_ablate(cfg: dict) -> int:
    seq_len = cfg["env"]["seq_len"]
    settings = [("T=Ls", seq_len), ("T=5Ls", 5 * seq_len), ("infinite", None)]
    out_root = Path(cfg["run"]["out"])
    kind = cfg["run"]["agent"]
    rows = []
    for name, horizon in settings:
        env_cfg = make_env_config(cfg, episode_len=horizon)
        for seed in cfg["run"]["seeds"]:
            out_dir = out_root / name.replace("=", "_").replace("*", "x") / f"seed_{seed}"
            result, _ = _run_one_seed(cfg, seed, out_dir, kind, env_cfg)
            rows.append({
                "setting": name, "seed": seed,
                "budget": cfg["run"]["budget"],
                "final_mean_score": float(np.mean(result.final_scores)),
                "mp_hd_final": mp_hd(result.final_batch),
            })
    out_root.mkdir(parents=True, exist_ok=True)
    write_csv(rows, ["setting", "seed", "budget", "final_mean_score", "mp_hd_final"],
              out_root / "ablation.csv")
    summary = []
    for name, _ in settings:
        sub = [r for r in rows if r["setting"] == name]
        summary.append({
            "setting": name, "budget": cfg["run"]["budget"],
            "final_mean_score": float(np.mean([r["final_mean_score"] for r in sub])),
            "mp_hd_final": float(np.mean([r["mp_hd_final"] for r in sub])),
        })
    write_csv(summary, ["setting", "budget", "final_mean_score", "mp_hd_final"],
              out_root / "ablation_summary.csv")
    write_run_manifest({"config": cfg, "experiment": "ablate-horizon",
                        "settings": [s for s, _ in settings]}, seed=-1,
                       target=out_root / "manifest.json")
    for row in summary:
        print(f"{row['setting']}: score={row['final_mean_score']:.4f} "
              f"mp_hd={row['mp_hd_final']:.2f}")
    return 0


def cmd_mismatch(cfg: dict) -> int:
    spec = cfg["run"]["oracle"]
    kind, _, rest = spec.partition(":")
    if kind != "synthetic":
        raise SystemExit("mismatch needs a synthetic oracle spec (twin landscapes)")
    env_cfg = make_env_config(cfg)
    out_root = Path(cfg["run"]["out"])
    summary = []
    for method in ("mcmc", "ppo"):
        for seed in cfg["run"]["seeds"]:
            oracle_ls, decoy_ls = twin_landscapes(int(rest or 0), env_cfg.seq_len,
                                                  env_cfg.alphabet.size)
            decoy = PottsScorer(decoy_ls)
            decoy.name = "decoy"
            truth = PottsScorer(oracle_ls)
            truth.name = "oracle"
            result = run_agent(method, env_cfg, decoy, cfg["run"]["budget"], seed,
                               agent_config=agent_config_from(cfg, method),
                               shadow_scorer=truth,
                               archive_capacity=cfg["run"]["archive_capacity"])
            out_dir = out_root / method / f"seed_{seed}"
            out_dir.mkdir(parents=True, exist_ok=True)
            _write_curves(result.curves, out_dir / "curves.csv")
            manifest = {"config": cfg, "status": result.status,
                        "ledger": result.ledger, "experiment": "mismatch"}
            write_run_manifest(manifest, seed, out_dir / "manifest.json")
            last = result.curves[-1]
            summary.append({
                "method": method, "seed": seed,
                "final_decoy_score": last["mean_score"],
                "final_oracle_score": last["mean_oracle_score"],
                "gap": last["mean_score"] - last["mean_oracle_score"],
            })
    out_root.mkdir(parents=True, exist_ok=True)
    write_csv(summary, ["method", "seed", "final_decoy_score",
                        "final_oracle_score", "gap"],
              out_root / "mismatch_summary.csv")
    write_run_manifest({"config": cfg, "experiment": "mismatch"}, seed=-1,
                       target=out_root / "manifest.json")
    for row in summary:
        print(f"{row['method']} seed {row['seed']}: decoy={row['final_decoy_score']:.4f} "
              f"oracle={row['final_oracle_score']:.4f}")
    return 0


def cmd_evaluate(cfg: dict, sequence_files: list[str]) -> int:
    if not sequence_files:
        raise SystemExit("evaluate needs at least one FASTA file")
    out_root = Path(cfg["run"]["out"])
    out_root.mkdir(parents=True, exist_ok=True)
    threshold = cfg["run"]["threshold"]
    ecfg = cfg["evaluate"]

    reference_reports = None
    if ecfg["reference_csv"]:
        reference_reports = _read_reference_csv(ecfg["reference_csv"])
    aa_reference = None
    if ecfg["aa_reference_csv"]:
        aa_reference = _read_aa_reference(ecfg["aa_reference_csv"])

    rows, pareto_sets = [], {"mp_hd": [], "mp_tm": [], "mp_rmsd": []}
    for path in sequence_files:
        label = Path(path).stem
        records = read_fasta(path, alphabet_symbols=cfg["env"]["alphabet"])
        if len(records) < 2:
            raise SystemExit(f"{path}: need at least 2 sequences")
        lengths = {len(r.sequence) for r in records}
        if len(lengths) != 1:
            raise SystemExit(f"{path}: sequences must share one length")
        seq_len = lengths.pop()
        alphabet = Alphabet(tuple(cfg["env"]["alphabet"]))
        mat = np.array([[alphabet.index(c) for c in r.sequence] for r in records])

        eval_cfg = copy.deepcopy(cfg)
        eval_cfg["env"]["seq_len"] = seq_len
        scorer = make_scorer(eval_cfg, alphabet)
        scores = scorer.score_batch(mat)

        row = {"label": label, "n": len(records),
               "mean_score": float(scores.mean()), "mp_hd": mp_hd(mat)}
        pareto_sets["mp_hd"].append(ParetoPoint(row["mean_score"], row["mp_hd"], label))

        if ecfg["traces_dir"]:
            traces = _load_traces(ecfg["traces_dir"], records)
            row["mp_tm"] = mp_tm(traces)
            row["mp_rmsd"] = mp_rmsd(traces)
            pareto_sets["mp_tm"].append(ParetoPoint(row["mean_score"], row["mp_tm"], label))
            pareto_sets["mp_rmsd"].append(ParetoPoint(row["mean_score"], row["mp_rmsd"], label))

        reports = _biophys_rows([r.sequence for r in records])
        if reports:
            arr = np.stack([r.as_array() for r in reports])
            for i, name in enumerate(bp.FEATURE_NAMES):
                row[f"mean_{name}"] = float(arr[:, i].mean())
            if reference_reports:
                row["dcs"] = bp.dcs(reports, reference_reports)
        freq = aa_frequency(mat, n_symbols=alphabet.size)
        if aa_reference is not None:
            row["aa_mae"] = distribution_mae(freq, aa_reference)
        write_csv([{"residue": s, "frequency": float(f)}
                   for s, f in zip(alphabet.symbols, freq)],
                  ["residue", "frequency"], out_root / f"aa_frequency_{label}.csv")
        rows.append(row)

    schema = ["label", "n", "mean_score", "mp_hd", "mp_tm", "mp_rmsd",
              "mean_w_mol", "mean_instability", "mean_pi", "mean_gravy", "dcs", "aa_mae"]
    write_csv(rows, schema, out_root / "metrics.csv")
    for metric, pts in pareto_sets.items():
        if pts:
            _pareto_outputs(pts, metric, threshold, out_root / f"pareto_{metric}.csv",
                            lower_better=(metric == "mp_tm"))
    write_run_manifest({"config": cfg, "experiment": "evaluate",
                        "inputs": list(sequence_files)}, seed=-1,
                       target=out_root / "manifest.json")
    for row in rows:
        print(f"{row['label']}: score={row['mean_score']:.4f} mp_hd={row['mp_hd']:.2f}")
    return 0


def _read_reference_csv(path: str) -> list[bp.BiophysReport]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        idx = {name: header.index(name) for name in ("w_mol", "instability", "pi", "gravy")}
        for line in fh:
            if not line.strip():
                continue
            cells = line.strip().split(",")
            rows.append(bp.BiophysReport(
                w_mol=float(cells[idx["w_mol"]]),
                instability=float(cells[idx["instability"]]),
                pi=float(cells[idx["pi"]]),
                gravy=float(cells[idx["gravy"]])))
    return rows


def _read_aa_reference(path: str) -> np.ndarray:
    freqs = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        ridx, fidx = header.index("residue"), header.index("frequency")
        for line in fh:
            if line.strip():
                cells = line.strip().split(",")
                freqs[cells[ridx]] = float(cells[fidx])
    return np.array([freqs.get(a, 0.0) for a in AMINO_ACIDS])


def _load_traces(traces_dir: str, records: list[FastaRecord]):
    traces = []
    for rec in records:
        path = Path(traces_dir) / f"{rec.id}.pdb"
        if not path.exists():
            raise SystemExit(f"missing trace file for sequence {rec.id!r}: {path}")
        traces.append(read_pdb_ca(path).trace)
    return traces


def cmd_serve(args: argparse.Namespace) -> int:
    landscape = None
    alphabet = Alphabet()
    if args.landscape:
        kind, _, rest = args.landscape.partition(":")
        if kind != "synthetic":
            raise SystemExit("serve-echo-oracle supports --landscape synthetic:SEED")
        landscape = PottsLandscape(args.seq_len, alphabet.size, int(rest or 0))
    host, _, port = args.addr.rpartition(":")
    server = EchoOracleServer(host or "127.0.0.1", int(port), score=args.score,
                              landscape=landscape, alphabet=alphabet)
    print(f"echo oracle listening on {server.address}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqopt")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--seed", type=int, action="append",
                       help="run seed (repeatable)")
        p.add_argument("--budget", type=int, help="scorer-query budget")
        p.add_argument("--agent", choices=["ppo", "ppo-rnd", "dqn", "gfn", "mcmc", "random"])
        p.add_argument("--beta", type=float, help="GFlowNet reward exponent")
        p.add_argument("--out", help="output directory")
        p.add_argument("--oracle", help="synthetic:SEED or remote:HOST:PORT")
        p.add_argument("--threshold", type=float, help="Pareto score threshold")
        p.add_argument("--seq-len", dest="seq_len", type=int)
        p.add_argument("--batch-size", dest="batch_size", type=int)

    run_p = sub.add_parser("run", help="train one optimizer")
    common(run_p)
    run_p.add_argument("--mode", choices=["oracle", "proxy"])
    run_p.add_argument("--episode-len", dest="episode_len", type=int,
                       help="finite-horizon episode length (0 = infinite)")

    abl_p = sub.add_parser("ablate-horizon", help="episode-length ablation")
    common(abl_p)

    mis_p = sub.add_parser("mismatch", help="decoy-vs-oracle twin landscape runs")
    common(mis_p)

    ev_p = sub.add_parser("evaluate", help="metrics for sequence files")
    common(ev_p)
    ev_p.add_argument("sequences", nargs="+", help="FASTA file(s), one per method")
    ev_p.add_argument("--traces-dir", dest="traces_dir",
                      help="directory of <id>.pdb CA traces")
    ev_p.add_argument("--reference-csv", dest="reference_csv",
                      help="biophysical reference CSV (w_mol,instability,pi,gravy)")
    ev_p.add_argument("--aa-reference-csv", dest="aa_reference_csv",
                      help="residue,frequency reference CSV")

    srv_p = sub.add_parser("serve-echo-oracle", help="wire-protocol test double")
    srv_p.add_argument("--addr", default="127.0.0.1:7777")
    srv_p.add_argument("--score", type=float, default=0.5)
    srv_p.add_argument("--landscape", help="synthetic:SEED to serve a real landscape")
    srv_p.add_argument("--seq-len", dest="seq_len", type=int, default=50)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve-echo-oracle":
        return cmd_serve(args)

    cfg = resolve_config(args.config, _flag_overrides(args))
    if args.command == "evaluate":
        for attr in ("traces_dir", "reference_csv", "aa_reference_csv"):
            value = getattr(args, attr, None)
            if value:
                cfg["evaluate"][attr] = value
        return cmd_evaluate(cfg, args.sequences)
    if args.command == "run":
        return cmd_run(cfg)
    if args.command == "ablate-horizon":
        return cmd_ablate(cfg)
    if args.command == "mismatch":
        return cmd_mismatch(cfg)
    raise SystemExit(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
