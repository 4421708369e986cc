"""Configuration management for Goblend."""
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv

from goblend.affect.knn import AffectConfig
from goblend.env.racing import EnvConfig
from goblend.explore.explorer import ExplorationConfig
from goblend.harness.experiments import HarnessConfig
from goblend.personas.persona import ClusterConfig
from goblend.traces.generator import GeneratorConfig

SECTIONS = {
    "env": EnvConfig,
    "generator": GeneratorConfig,
    "cluster": ClusterConfig,
    "affect": AffectConfig,
    "harness": HarnessConfig,
}
SETTINGS = ("output_dir", "log_level", "log_json")


@dataclass
class GoblendConfig:
    """All parameters of a run, from a JSON file and GOBLEND_* environment variables."""

    env: EnvConfig = field(default_factory=EnvConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    affect: AffectConfig = field(default_factory=AffectConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)

    # Runtime
    output_dir: Path = Path("./runs")
    log_level: str = "INFO"
    log_json: bool = False

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None, env_path: Optional[Path] = None) -> "GoblendConfig":
        """Load the config file (if any), then apply environment overrides."""
        if env_path:
            load_dotenv(env_path)
        else:
            load_dotenv()

        path = path or os.getenv("GOBLEND_CONFIG") or None
        data = {}
        if path:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}: invalid JSON ({e})") from e
            if not isinstance(data, dict):
                raise ValueError(f"{path}: top level must be an object")
            unknown = set(data) - set(SECTIONS) - set(SETTINGS)
            if unknown:
                raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")

        config = cls(**{name: model.model_validate(data.get(name, {})) for name, model in SECTIONS.items()})
        config.output_dir = Path(os.getenv("GOBLEND_OUTPUT_DIR") or data.get("output_dir", config.output_dir))
        config.log_level = os.getenv("GOBLEND_LOG_LEVEL") or data.get("log_level", config.log_level)
        log_json = os.getenv("GOBLEND_LOG_JSON")
        config.log_json = log_json.lower() == "true" if log_json else bool(data.get("log_json", config.log_json))

        workers = os.getenv("GOBLEND_WORKERS")
        if workers:
            exploration = ExplorationConfig.model_validate(
                {**config.harness.exploration.model_dump(by_alias=True), "workers": int(workers)}
            )
            config.harness = config.harness.model_copy(update={"exploration": exploration})
        return config

    def to_dict(self) -> dict:
        data = {name: getattr(self, name).model_dump(mode="json", by_alias=True) for name in SECTIONS}
        data.update(output_dir=str(self.output_dir), log_level=self.log_level, log_json=self.log_json)
        return data

    def write_resolved(self, directory: Union[str, Path]) -> Path:
        """Copy of the effective configuration beside a run's outputs."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "resolved_config.json"
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return path
