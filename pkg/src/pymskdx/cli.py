import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from . import __version__
from .config.settings import config
from .core.adapter.nf4 import nf4_dequantize, nf4_quantize, quantization_error_bound
from .core.adapter.params import adapter_bytes, count_trainable, load_arch_spec, lora_config_for
from .core.enums import MacroScope, Provenance, VoteMode
from .core.gateway import create_backend
from .core.metrics import align_predictions, confusion_pairs, evaluate, to_table
from .core.models import RunManifest
from .core.prompts import FINE_TUNE, template_digest
from .core.stratify import iterative_stratify, make_split_spec, random_split, split_quality
from .core.vocabulary import configured_vocabulary
from .core.voting import group_runs, majority_vote
from .exceptions import BackendUnavailableError, MskDxError
from .labeler import MANIFEST_FILE, TeacherLabeler, input_digests
from .services import store
from .utils.logger import get_logger, log_execution, logger

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2
EXIT_BACKEND = 3

ASSIGNMENT_FILE = "assignment.jsonl"
QUALITY_FILE = "quality.json"
FINETUNE_FILE = "finetune.jsonl"


def _ratios(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"proporciones inválidas: {text!r}") from None


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--vocab", type=Path, help="TSV de vocabulario (por defecto, el empaquetado)")
    common.add_argument("--verbose", action="store_true", help="Activar logs detallados")

    parser = argparse.ArgumentParser(prog="pymskdx",
                                     description="Etiquetado, partición y evaluación de diagnósticos MSK con LLMs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    label = sub.add_parser("label", parents=[common], help="Etiquetar un corpus con el modelo profesor")
    label.add_argument("--corpus", type=Path, required=True)
    label.add_argument("--out", type=Path, required=True, help="Directorio de salida")
    label.add_argument("--backend", choices=["mock", "http"], default=None)
    label.add_argument("--runs", type=int, default=None, help="Corridas por reporte (3)")
    label.add_argument("--temperature", type=float, default=None)
    label.add_argument("--vote", default=None, help="set | per-label")
    label.add_argument("--seed", type=int, default=None, help="Semilla del backend mock")
    label.add_argument("--max-in-flight", type=int, default=None)

    vote = sub.add_parser("vote", parents=[common], help="Re-votar corridas persistidas")
    vote.add_argument("--runs-file", type=Path, required=True)
    vote.add_argument("--out", type=Path, required=True, help="Archivo de etiquetas de salida")
    vote.add_argument("--vote", default=None, help="set | per-label")

    split = sub.add_parser("split", parents=[common], help="Partición estratificada del corpus etiquetado")
    split.add_argument("--labels", type=Path, required=True)
    split.add_argument("--out", type=Path, required=True, help="Directorio de salida")
    split.add_argument("--ratios", type=_ratios, default=None, help="p. ej. 0.5969,0.4031")
    split.add_argument("--seed", type=int, default=None)
    split.add_argument("--order", choices=["first", "second"], default=None)
    split.add_argument("--method", choices=["iterative", "random"], default="iterative")

    emit = sub.add_parser("emit-finetune", parents=[common], help="Generar pares prompt/completion")
    emit.add_argument("--corpus", type=Path, required=True)
    emit.add_argument("--labels", type=Path, required=True)
    emit.add_argument("--out", type=Path, required=True, help="Directorio de salida")
    emit.add_argument("--assignment", type=Path, default=None, help="Asignación para separar por parte")

    for name, help_text in (("eval", "Evaluar predicciones contra el gold"),
                            ("errors", "Pares de confusión más frecuentes")):
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.add_argument("--gold", type=Path, required=True)
        cmd.add_argument("--pred", type=Path, required=True)
        cmd.add_argument("--pred-format", choices=["labels", "raw"], default="labels")
        cmd.add_argument("--corpus", type=Path, default=None, help="Corpus para agrupar por modalidad")
        cmd.add_argument("--strict-missing", action="store_true",
                         help="Fallar si falta la predicción de un reporte gold")
        if name == "eval":
            cmd.add_argument("--out", type=Path, default=None, help="JSON de métricas")
            cmd.add_argument("--count-oov-as-fp", action=argparse.BooleanOptionalAction, default=None)
            cmd.add_argument("--macro-scope", choices=[s.value for s in MacroScope], default=None)
        else:
            cmd.add_argument("--top-k", type=int, default=None)

    params = sub.add_parser("param-count", parents=[common], help="Parámetros entrenables de LoRA")
    params.add_argument("--arch", required=True, help="llama3-8b | mistral-7b | ruta a JSON")
    params.add_argument("--rank", type=int, default=None)
    params.add_argument("--alpha", type=float, default=None)

    quant = sub.add_parser("quantize", parents=[common], help="Cuantizar un tensor .npy a NF4")
    quant.add_argument("--input", type=Path, required=True)
    quant.add_argument("--out", type=Path, required=True)
    quant.add_argument("--block-size", type=int, default=None)

    return parser.parse_args(argv)


# -----------------------
# Comandos
# -----------------------

def cmd_label(args: argparse.Namespace) -> int:
    vocab = configured_vocabulary(args.vocab)
    kind = (args.backend or config.BACKEND).lower()
    backend_kwargs = {"seed": args.seed} if kind == "mock" and args.seed is not None else {}
    backend = create_backend(kind, vocab, **backend_kwargs)
    labeler = TeacherLabeler(
        vocab=vocab,
        backend=backend,
        runs_per_report=args.runs,
        temperature=args.temperature,
        vote_mode=args.vote,
        max_in_flight=args.max_in_flight,
    )
    outcome = labeler.label_file(args.corpus, args.out)

    _emit({"labeled": outcome.n_labeled, "failed": sorted(outcome.failures),
           "unparsable_runs": outcome.unparsable_runs})
    if outcome.all_failed:
        logger.error("El backend falló para todos los reportes")
        return EXIT_BACKEND
    if outcome.failures:
        logger.warning(f"{len(outcome.failures)} reportes sin etiquetar: {sorted(outcome.failures)}")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_vote(args: argparse.Namespace) -> int:
    mode = VoteMode.from_text(args.vote or config.VOTE_MODE)
    grouped = group_runs(run.to_run_output() for run in store.read_runs(args.runs_file))
    label_sets = [majority_vote(runs, mode) for runs in grouped.values()]
    store.write_labels(label_sets, args.out)
    logger.info(f"Re-votados {len(label_sets)} reportes ({mode.value})")
    return EXIT_OK


def cmd_split(args: argparse.Namespace) -> int:
    spec = make_split_spec(args.ratios, args.seed, args.order)
    labels = store.read_labels(args.labels, default_provenance=Provenance.TEACHER_VOTE)
    corpus = list(labels.items())
    splitter = iterative_stratify if args.method == "iterative" else random_split
    assignment = splitter(corpus, spec)
    quality = split_quality(assignment, corpus, spec)

    outputs = [store.write_assignment(assignment, args.out / ASSIGNMENT_FILE),
               store.write_quality(quality, args.out / QUALITY_FILE)]
    manifest = RunManifest(tool_version=__version__, command=f"split --method {args.method}",
                           seeds={"split": spec.seed}, split_spec=spec,
                           inputs=input_digests({"labels": args.labels}))
    store.write_manifest(manifest, args.out / MANIFEST_FILE, outputs=outputs)

    _emit({"part_sizes": quality.part_sizes, "max_deviation": quality.max_deviation,
           "mean_deviation": quality.mean_deviation})
    return EXIT_OK


def cmd_emit_finetune(args: argparse.Namespace) -> int:
    vocab = configured_vocabulary(args.vocab)
    reports = store.ingest_reports(args.corpus)
    labels = store.read_labels(args.labels, default_provenance=Provenance.TEACHER_VOTE)
    pairs = store.emit_finetune_pairs(reports, labels, vocab)

    outputs = [store.write_finetune(pairs, args.out / FINETUNE_FILE)]
    inputs = {"corpus": args.corpus, "labels": args.labels}
    if args.assignment is not None:
        assignment = store.read_assignment(args.assignment)
        outputs.extend(store.write_finetune_parts(reports, pairs, assignment, args.out).values())
        inputs["assignment"] = args.assignment

    manifest = RunManifest(tool_version=__version__, command="emit-finetune",
                           template_hashes={FINE_TUNE.kind.value: template_digest(FINE_TUNE)},
                           vocabulary_hash=vocab.digest(), inputs=input_digests(inputs))
    store.write_manifest(manifest, args.out / MANIFEST_FILE, outputs=outputs)
    logger.info(f"Pares de fine-tune emitidos: {len(pairs)}")
    return EXIT_OK


def _eval_pairs(args: argparse.Namespace):
    vocab = configured_vocabulary(args.vocab)
    gold = store.read_labels(args.gold, default_provenance=Provenance.GOLD)
    if args.pred_format == "raw":
        predicted = store.read_raw_predictions(args.pred, vocab)
    else:
        predicted = store.read_labels(args.pred, default_provenance=Provenance.MODEL_PREDICTION)
    modalities = {}
    if args.corpus is not None:
        modalities = {r.report_id: r.modality for r in store.ingest_reports(args.corpus)}
    return vocab, align_predictions(gold, predicted, modalities, missing_as_empty=not args.strict_missing)


def cmd_eval(args: argparse.Namespace) -> int:
    _, pairs = _eval_pairs(args)
    scope = MacroScope(args.macro_scope) if args.macro_scope else None
    report = evaluate(pairs, count_oov_as_fp=args.count_oov_as_fp, macro_scope=scope)

    print(to_table(report))
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"F1 micro {report.f1_micro:.3f}, F1 macro {report.f1_macro:.3f} sobre {report.n_reports} reportes")
    return EXIT_OK


def cmd_errors(args: argparse.Namespace) -> int:
    vocab, pairs = _eval_pairs(args)
    for pair in confusion_pairs(pairs, top_k=args.top_k):
        gold_name = vocab.entry(pair.gold_label).canonical_name if pair.gold_label in vocab else str(pair.gold_label)
        pred_name = (vocab.entry(pair.predicted_label).canonical_name
                     if pair.predicted_label in vocab else str(pair.predicted_label))
        print(f"{pair.count}\t{gold_name} -> {pred_name}")
    return EXIT_OK


def cmd_param_count(args: argparse.Namespace) -> int:
    arch = load_arch_spec(args.arch)
    lora = lora_config_for(arch, rank=args.rank, alpha=args.alpha)
    total, per_layer = count_trainable(lora)
    _emit({
        "arch": arch.name,
        "rank": lora.rank,
        "alpha": lora.alpha,
        "layers": lora.layer_count,
        "per_layer": per_layer,
        "total": total,
        "bytes_16bit": adapter_bytes(total),
    })
    return EXIT_OK


def cmd_quantize(args: argparse.Namespace) -> int:
    try:
        weights = np.load(args.input, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise MskDxError(f"no se pudo leer el tensor {args.input}: {exc}") from exc

    quantized = nf4_quantize(weights, block_size=args.block_size)
    quantized.save(args.out)

    error = np.abs(nf4_dequantize(quantized) - np.asarray(weights, dtype=np.float64))
    bound = quantization_error_bound(quantized.absmax)
    n = quantized.n_elements
    # Referencia: pesos a 16 bits; absmax también a 16 bits.
    stored = quantized.code_payload_bytes() + 2 * quantized.n_blocks
    _emit({
        "elements": n,
        "block_size": quantized.block_size,
        "max_abs_error": float(error.max()) if n else 0.0,
        "mean_abs_error": float(error.mean()) if n else 0.0,
        "error_bound": float(bound.max()) if bound.size else 0.0,
        "compression_ratio": (2 * n / stored) if stored else 0.0,
    })
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "label": cmd_label,
    "vote": cmd_vote,
    "split": cmd_split,
    "emit-finetune": cmd_emit_finetune,
    "eval": cmd_eval,
    "errors": cmd_errors,
    "param-count": cmd_param_count,
    "quantize": cmd_quantize,
}


def _emit(payload: dict) -> None:
    print(json.dumps(payload, ensure_ascii=False))


@log_execution
def main(argv: Optional[Sequence[str]] = None) -> int:
    # 1. Procesar argumentos
    args = parse_arguments(argv)

    if args.verbose:
        config.configure(DEBUG=True)
        get_logger().setLevel("DEBUG")

    # 2. Ejecutar el comando y traducir errores a códigos de salida
    try:
        return COMMANDS[args.command](args)
    except BackendUnavailableError as e:
        logger.error(f"Backend no disponible: {e}")
        return EXIT_BACKEND
    except (MskDxError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE


def run() -> int:
    return main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(run())
