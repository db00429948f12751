"""Shared setup for tests that drive the full pipeline on synthetic data."""

from pathlib import Path

from versemt.synthetic import write_fixture

RULES = "ngadto\tverb_canonical\tparoon\tpumaroon,yumaon\nabraham\tname_copy\tabraham\tkaniya,siya\n"

SMALL_RUN = {
    "split": {"test_size": 50, "val_size": 50, "seed": 4, "oversample": 10},
    "model": {"embed_dim": 32, "hidden_dim": 64, "attention": "true", "init_scale": 0.2},
    "train": {"lr": 0.05, "max_steps": 8000, "report_every": 500, "seed": 1,
              "validation_bleu_every": 2000, "stop_threshold": 0.05},
}


def pipeline_config(root: Path, table: bool = True, **sections) -> Path:
    """Write the synthetic Bible pair and an INI file under ``root``; return the INI path."""
    root.mkdir(parents=True, exist_ok=True)
    write_fixture(root)
    values = {"paths": {"source_xml": "source.xml", "target_xml": "target.xml", "workdir": "work"}}
    for name, body in SMALL_RUN.items():
        values[name] = dict(body)
    if table:
        (root / "rules.tsv").write_text(RULES, encoding="utf-8")
        values["lexicon"] = {"table": "rules.tsv"}
    for name, body in sections.items():
        values.setdefault(name, {}).update(body)
    lines = []
    for name, body in values.items():
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}" for k, v in body.items()]
        lines.append("")
    path = root / "run.ini"
    path.write_text("\n".join(lines), encoding="utf-8")
    return path
