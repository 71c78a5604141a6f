import json
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple, Union

from pydantic import ValidationError

from pymskdx.config.settings import config
from pymskdx.core.models import ArchSpec, LoraConfig, TrainingHyperparameters
from pymskdx.exceptions import AdapterError

SHIPPED_ARCHS = ("llama3-8b", "mistral-7b")
BYTES_PER_PARAM_16BIT = 2


def count_trainable(lora: LoraConfig) -> Tuple[int, int]:
    """(total, por capa) de parámetros LoRA: Σ r·(d_in + d_out) por módulo objetivo."""
    per_layer = sum(lora.rank * (m.d_in + m.d_out) for m in lora.target_modules)
    return per_layer * lora.layer_count, per_layer


def adapter_bytes(params: int, bytes_per_param: int = BYTES_PER_PARAM_16BIT) -> int:
    return params * bytes_per_param


def load_arch_spec(path_or_name: Union[str, Path]) -> ArchSpec:
    """Lee una especificación JSON por ruta o por nombre empaquetado (p. ej. ``llama3-8b``)."""
    if str(path_or_name) in SHIPPED_ARCHS:
        source = resources.files("pymskdx") / "data" / "archs" / f"{path_or_name}.json"
        text = source.read_text(encoding="utf-8")
    else:
        try:
            text = Path(path_or_name).read_text(encoding="utf-8")
        except OSError as exc:
            raise AdapterError(f"no se pudo leer la especificación {path_or_name}: {exc}") from exc

    try:
        return ArchSpec.model_validate(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as exc:
        raise AdapterError(f"especificación de arquitectura inválida: {exc}") from exc


def _configured_batch_size(arch: ArchSpec) -> Optional[int]:
    name = arch.name.lower()
    if "llama" in name:
        return config.BATCH_SIZE_LLAMA
    if "mistral" in name:
        return config.BATCH_SIZE_MISTRAL
    return None


def lora_config_for(arch: ArchSpec, rank: Optional[int] = None, alpha: Optional[float] = None,
                    batch_size: Optional[int] = None) -> LoraConfig:
    """LoraConfig con los hiperparámetros registrados en la configuración."""
    training = TrainingHyperparameters(
        optimizer=config.OPTIMIZER,
        learning_rate=config.LEARNING_RATE,
        weight_decay=config.WEIGHT_DECAY,
        lr_scheduler=config.LR_SCHEDULER,
        epochs=config.EPOCHS,
        batch_size=batch_size if batch_size is not None else _configured_batch_size(arch),
    )
    try:
        return LoraConfig(
            rank=config.LORA_RANK if rank is None else rank,
            alpha=config.LORA_ALPHA if alpha is None else alpha,
            dropout=config.LORA_DROPOUT,
            bias=config.LORA_BIAS,
            target_modules=arch.target_modules,
            layer_count=arch.layer_count,
            training=training,
        )
    except ValidationError as exc:
        raise AdapterError(f"configuración LoRA inválida: {exc}") from exc
