"""Command line interface.

Subcommands: index, query, cgap, eval, serve.  Exit codes: 0 success,
1 runtime/provider failure, 2 usage or input-format error.
"""

from __future__ import annotations

import json
import sys

import click

from . import cgap as cgap_mod
from . import metrics, retrieval, store
from .config import load_config
from .corpus import CorpusError, ingest_jsonl
from .errors import ConfigError, LfqaError, ProviderError
from .pipeline import Engine, build_corpus_tables
from .service import canonical_json, create_app

MODES = ("extractive", "abstractive", "cgap")


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_engine(index_path: str, config_path: str | None) -> Engine:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        _fail(str(exc), 2)
    try:
        return Engine.from_artifact(
            index_path, cfg, warn=lambda m: click.echo(f"warning: {m}", err=True)
        )
    except store.StoreError as exc:
        _fail(str(exc), 2)


@click.group()
@click.version_option(package_name="lfqa")
def main() -> None:
    """Long-form question answering over an indexed corpus."""


@main.command()
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Corpus JSONL file.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Index artifact to write.")
@click.option("--max-words", default=400, show_default=True,
              help="Word budget per passage.")
def index(corpus_path: str, out_path: str, max_words: int) -> None:
    """Build the index artifact from a corpus file."""
    if max_words < 1:
        _fail("--max-words must be >= 1", 2)
    try:
        docs = ingest_jsonl(corpus_path)
    except CorpusError as exc:
        _fail(str(exc), 2)
    if not docs:
        _fail("corpus is empty", 2)
    documents, passages = build_corpus_tables(docs, max_words)
    idx = retrieval.build_index(list(passages.values()))
    store.save_index(out_path, documents, passages, idx, max_words)
    click.echo(
        f"indexed {len(documents)} documents -> {len(passages)} passages, "
        f"{len(idx.postings)} terms -> {out_path}"
    )


def _print_query_human(body: dict) -> None:
    click.echo(f"question: {body['question']}  [mode={body['mode']} seed={body['seed']}]")
    if body.get("no_results") and not body["passages"]:
        click.echo("no passages matched the question")
    for i, row in enumerate(body["passages"], start=1):
        s = row["scores"]
        click.echo(
            f"\n#{i} {row['ref']}  rerank={s['rerank_score']:.4f} "
            f"(match={s['s_match']:.4f}, conf={s['s_conf']:.4f}, "
            f"freq={s['s_freq']}, num={s['s_num']})"
        )
        text = row["text"]
        marked = []
        prev = 0
        for h in sorted(row["highlights"], key=lambda x: x["start"]):
            marked.append(text[prev : h["start"]])
            marked.append("[" + text[h["start"] : h["end"]] + "]")
            prev = h["end"]
        marked.append(text[prev:])
        click.echo("".join(marked))
    if body.get("cgap"):
        click.echo("\nvote tally:")
        for key, count in body["cgap"]["tally"]:
            click.echo(f"  {count:3d}  {key}")
    click.echo(f"\nanswer ({body['answer']['word_count']} words):")
    click.echo(body["answer"]["text"] or "(empty)")
    if body["answer"].get("error"):
        click.echo(f"warning: generation stopped early: {body['answer']['error']}", err=True)


@main.command()
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Index artifact.")
@click.option("--question", required=True, help="The question to answer.")
@click.option("--mode", type=click.Choice(MODES), default=None,
              help="Generation mode (default: from config).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Pipeline config JSON.")
@click.option("--seed", default=0, show_default=True, help="Sampling seed.")
@click.option("--n", default=None, type=int, help="Passages to retrieve.")
@click.option("--json", "as_json", is_flag=True, help="Emit machine JSON.")
def query(index_path: str, question: str, mode: str | None, config_path: str | None,
          seed: int, n: int | None, as_json: bool) -> None:
    """Answer a question against an indexed corpus."""
    if not question.strip():
        _fail("--question must be non-empty", 2)
    if n is not None and n < 1:
        _fail("--n must be >= 1", 2)
    engine = _load_engine(index_path, config_path)
    try:
        resp = engine.answer_question(question, mode=mode, seed=seed, n=n)
    except ProviderError as exc:
        _fail(f"provider failure: {exc}", 1)
    except LfqaError as exc:
        _fail(str(exc), 1)
    body = resp.to_dict()
    if as_json:
        click.echo(canonical_json(body))
    else:
        _print_query_human(body)
        if resp.timings_ms:
            parts = ", ".join(f"{k} {v:.1f}ms" for k, v in resp.timings_ms.items())
            click.echo(f"\ntimings: {parts}")


@main.command(name="cgap")
@click.option("--question", required=True, help="The question to answer.")
@click.option("--repo", "repo_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Support repository JSONL (context/question/answer).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Pipeline config JSON.")
@click.option("--k", default=None, type=int, help="Contexts to sample.")
@click.option("--m", default=None, type=int, help="Support samples per prompt.")
@click.option("--seed", default=0, show_default=True, help="Sampling seed.")
@click.option("--json", "as_json", is_flag=True, help="Emit machine JSON.")
def cgap_cmd(question: str, repo_path: str | None, config_path: str | None,
             k: int | None, m: int | None, seed: int, as_json: bool) -> None:
    """Closed-book answering via two-stage prompting and voting."""
    if not question.strip():
        _fail("--question must be non-empty", 2)
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        _fail(str(exc), 2)
    k = cfg.cgap.k if k is None else k
    m = cfg.cgap.m if m is None else m
    if k < 1:
        _fail("--k must be >= 1", 2)
    if m < 0:
        _fail("--m must be >= 0", 2)

    from .providers import EchoLM, HashEmbedding, HTTPEmbeddingProvider, HTTPLMProvider

    p = cfg.providers
    if p.lm_url is None:
        click.echo(
            "warning: no LM endpoint configured; using the built-in deterministic mock",
            err=True,
        )
        lm = EchoLM()
    else:
        lm = HTTPLMProvider(p.lm_url, p.timeout_s)
    embedder = HashEmbedding() if p.emb_url is None else HTTPEmbeddingProvider(p.emb_url, p.timeout_s)

    try:
        if repo_path is not None:
            repo = cgap_mod.SupportRepository.from_jsonl(repo_path, embedder)
            m = min(m, len(repo))
            result = cgap_mod.run_cgap(
                question, repo, lm, embedder, k=k, m=m, top_p=cfg.cgap.top_p, seed=seed,
            )
        else:
            ctx_prompt = cgap_mod.build_context_prompt([], question)
            contexts = cgap_mod.generate_contexts(
                lm, ctx_prompt, k, top_p=cfg.cgap.top_p, seed=seed
            )
            answers = [
                cgap_mod.predict_answer(
                    lm, cgap_mod.build_answer_prompt([], ctx, question),
                    seed=seed + 1000 + i,
                )
                for i, ctx in enumerate(contexts)
            ]
            result = cgap_mod.majority_vote(answers, contexts)
    except ValueError as exc:
        _fail(str(exc), 2)
    except ProviderError as exc:
        _fail(f"provider failure: {exc}", 1)

    body = {
        "question": question,
        "seed": seed,
        "contexts": list(result.contexts),
        "raw_answers": list(result.raw_answers),
        "tally": [[key, count] for key, count in result.sorted_tally()],
        "final": result.final,
    }
    if as_json:
        click.echo(canonical_json(body))
    else:
        click.echo(f"question: {question}")
        for i, (ctx, ans) in enumerate(zip(result.contexts, result.raw_answers), start=1):
            snippet = ctx if len(ctx) <= 70 else ctx[:67] + "..."
            click.echo(f"  context {i}: {snippet}")
            click.echo(f"   answer {i}: {ans}")
        click.echo("tally:")
        for key, count in result.sorted_tally():
            click.echo(f"  {count:3d}  {key}")
        click.echo(f"final: {result.final}")


@main.command(name="eval")
@click.option("--pred", "pred_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Predictions JSONL: question/prediction/golds per line.")
@click.option("--metric", "metric_csv", default="em,f1,rougeL,faithfulness",
              show_default=True, help="Comma-separated metric names.")
@click.option("--json", "as_json", is_flag=True, help="Emit the full report as JSON.")
def eval_cmd(pred_path: str, metric_csv: str, as_json: bool) -> None:
    """Score a predictions file."""
    names = [x.strip() for x in metric_csv.split(",") if x.strip()]
    if not names:
        _fail("--metric must name at least one metric", 2)
    for name in names:
        if name not in metrics.KNOWN_METRICS:
            _fail(f"unknown metric {name!r}; known: {', '.join(metrics.KNOWN_METRICS)}", 2)
    try:
        records = metrics.load_eval_jsonl(pred_path)
    except metrics.EvalFormatError as exc:
        _fail(str(exc), 2)
    if not records:
        _fail("predictions file holds no records", 2)
    report = metrics.evaluate_records(records, names)
    if as_json:
        click.echo(canonical_json(report.to_dict()))
    else:
        click.echo(f"examples: {report.n_examples}")
        for name in names:
            click.echo(f"{name}: {report.means[name]:.4f}")


@main.command()
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Index artifact.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Pipeline config JSON.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def serve(index_path: str, config_path: str | None, host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    engine = _load_engine(index_path, config_path)
    app = create_app(engine)
    click.echo(f"serving {len(engine.passages)} passages on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
