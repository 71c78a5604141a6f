import importlib
import importlib.util
import os
import sys
from pathlib import Path
from types import ModuleType
from typing import Any, Dict, Iterable


class SettingsLoader:
    """
    Localiza módulos de settings del proyecto que usa la librería y extrae sus
    constantes en MAYÚSCULAS.

    Prioridad (de menor a mayor):
      1. ``settings.py`` en el directorio de trabajo
      2. ``settings_<PYMSKDX_ENV>.py`` en el directorio de trabajo
      3. módulo importable indicado en ``PYMSKDX_SETTINGS_MODULE``
    """

    SETTINGS_MODULE_ENV = "PYMSKDX_SETTINGS_MODULE"
    ENV_NAME = "PYMSKDX_ENV"

    # Las credenciales solo se aceptan desde el entorno del proceso.
    FORBIDDEN_KEYS = frozenset({"DX_API_KEY"})

    @classmethod
    def load(cls) -> Dict[str, Any]:
        data: Dict[str, Any] = {}

        data.update(cls._load_from_filename("settings.py"))

        env = os.getenv(cls.ENV_NAME)
        if env:
            data.update(cls._load_from_filename(f"settings_{env}.py"))

        module_path = os.getenv(cls.SETTINGS_MODULE_ENV)
        if module_path:
            data.update(cls._extract_uppercase(importlib.import_module(module_path)))

        return data

    @classmethod
    def _load_from_filename(cls, filename: str) -> Dict[str, Any]:
        path = Path(os.getcwd()) / filename
        if not path.exists():
            return {}

        module_name = f"_pymskdx_settings_{path.stem}"
        spec = importlib.util.spec_from_file_location(module_name, path)
        module = importlib.util.module_from_spec(spec)
        sys.modules[module_name] = module
        spec.loader.exec_module(module)

        return cls._extract_uppercase(module)

    @classmethod
    def _extract_uppercase(cls, module: ModuleType) -> Dict[str, Any]:
        return cls._filter(vars(module).items())

    @classmethod
    def _filter(cls, items: Iterable[tuple[str, Any]]) -> Dict[str, Any]:
        return {
            key: value
            for key, value in items
            if key.isupper() and key not in cls.FORBIDDEN_KEYS
        }
