import json
import logging
import os
from typing import Any, Dict

logger = logging.getLogger("Config")

DATASET_ROOT_ENV = "DRIFTCL_DATASET_ROOT"
OUTPUT_ROOT_ENV = "DRIFTCL_OUTPUT_ROOT"

DEFAULTS: Dict[str, Any] = {
    "datasets": {
        "root": "data/fashion_mnist",
        "fashion_mnist_url": "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/",
        "download_timeout": 60,
    },
    "runs": {"output_root": "runs", "workers": 1},
    "logging": {"level": "INFO"},
}


class Config:
    """Ambient settings from `config.json` in the working directory.

    Missing sections fall back to DEFAULTS; environment variables override
    the dataset and output roots.
    """

    _instance = None
    _config: Dict[str, Any] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Config, cls).__new__(cls)
            cls._instance._load_config()
        return cls._instance

    def _load_config(self):
        self._config = {}
        config_path = os.path.join(os.getcwd(), "config.json")
        if os.path.exists(config_path):
            try:
                with open(config_path, "r") as f:
                    self._config = json.load(f)
            except (json.JSONDecodeError, IOError) as e:
                logger.warning(f"Error loading config.json: {e}")
        else:
            logger.debug(f"config.json not found at {config_path}, using defaults")

    def get(self, key: str, default: Any = None) -> Any:
        return self._config.get(key, DEFAULTS.get(key, default))

    def section_value(self, section: str, key: str) -> Any:
        return self.get(section, {}).get(key, DEFAULTS[section][key])

    def dataset_root(self) -> str:
        return os.environ.get(DATASET_ROOT_ENV) or self.section_value("datasets", "root")

    def output_root(self) -> str:
        return os.environ.get(OUTPUT_ROOT_ENV) or self.section_value("runs", "output_root")


config = Config()
