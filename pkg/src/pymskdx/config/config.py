import os
from pathlib import Path
from typing import List, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    """Configuración base de la aplicación."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    # -----------------------
    # Flags generales
    # -----------------------
    DEBUG: bool = False
    USE_CACHE: bool = False

    LOG_LEVEL: Optional[str] = "INFO"
    LOG_BACKUP_COUNT: int = 10
    LOG_TO_FILE: bool = True
    FORCE_COLOR: bool = False

    # -----------------------
    # Paths
    # -----------------------
    BASE_DIR: Path = Path(os.getcwd())

    # -----------------------
    # Vocabulario
    # -----------------------
    VOCAB_PATH: Optional[Path] = None  # None -> archivo empaquetado
    VOCAB_STRICT: bool = True
    VOCAB_EXPECTED_SIZE: int = 120

    # -----------------------
    # Gateway LLM
    # -----------------------
    BACKEND: str = "mock"
    MODEL_NAME: str = "gpt-4-32k"
    DX_API_URL: Optional[str] = None
    MAX_TOKENS: int = 1024
    HTTP_TIMEOUT: float = 60.0
    HTTP_MAX_ATTEMPTS: int = 5
    HTTP_BACKOFF_BASE: float = 1.0
    HTTP_BACKOFF_MAX: float = 30.0
    MAX_IN_FLIGHT: int = 4

    MOCK_SEED: int = 7
    MOCK_FLIP_PROBABILITY: float = 0.1
    MOCK_MAX_LABELS: int = 3
    MOCK_OOV_PROBABILITY: float = 0.0

    # -----------------------
    # Etiquetado / votación
    # -----------------------
    RUNS_PER_REPORT: int = 3
    TEMPERATURE: float = 1.0
    VOTE_MODE: str = "set"

    # -----------------------
    # Partición
    # -----------------------
    SPLIT_RATIOS: List[float] = [0.5969, 0.4031]  # 18,538 / 12,518 de 31,056
    SPLIT_SEED: int = 42
    SPLIT_ORDER: str = "first"

    # -----------------------
    # Evaluación
    # -----------------------
    COUNT_OOV_AS_FP: bool = True
    MACRO_SCOPE: str = "supported"
    CONFUSION_TOP_K: int = 10

    # -----------------------
    # QLoRA (solo se registran; no hay bucle de entrenamiento)
    # -----------------------
    NF4_BLOCK_SIZE: int = 64
    LORA_RANK: int = 64
    LORA_ALPHA: float = 16.0
    LORA_DROPOUT: float = 0.05
    LORA_BIAS: str = "none"
    OPTIMIZER: str = "adamw_8bit"
    LEARNING_RATE: float = 3e-4
    WEIGHT_DECAY: float = 0.01
    LR_SCHEDULER: str = "reduce_on_plateau"
    EPOCHS: int = 5
    BATCH_SIZE_LLAMA: int = 128
    BATCH_SIZE_MISTRAL: int = 192

    # -----------------------
    # Helpers
    # -----------------------
    def get_log_path(self) -> Path:
        log_dir = self.BASE_DIR / "logs"
        log_dir.mkdir(exist_ok=True)
        return log_dir

    def get_cache_path(self) -> Path:
        cache_dir = self.BASE_DIR / "cache"
        cache_dir.mkdir(exist_ok=True)
        return cache_dir
