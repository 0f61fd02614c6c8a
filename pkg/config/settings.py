import os
import logging
from pathlib import Path

from dotenv import load_dotenv

from core.exceptions import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)


class Settings:
    # Каталог результатов по умолчанию (перекрывается флагом --out)
    OUTPUT_DIR = os.getenv("WAVEFARM_OUTPUT_DIR", "./runs")

    @property
    def output_dir(self) -> Path:
        return Path(self.OUTPUT_DIR).expanduser()

    def verify_settings(self):
        """Проверяем, что каталог результатов можно использовать"""
        if not self.OUTPUT_DIR:
            raise ConfigError("WAVEFARM_OUTPUT_DIR задан пустой строкой")
        path = self.output_dir
        if path.exists() and not path.is_dir():
            raise ConfigError(f"WAVEFARM_OUTPUT_DIR указывает на файл, а не каталог: {path}")
        logger.debug(f"[SETTINGS] output directory {path}")


settings = Settings()
