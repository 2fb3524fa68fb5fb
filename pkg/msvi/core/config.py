from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    APP_ENV: str = "dev"
    APP_NAME: str = "msvi-bench"
    LOG_LEVEL: str = "INFO"

    # valores por defecto de los solvers (los flags de la CLI los sobreescriben)
    DEFAULT_EPS: float = 1e-5
    DEFAULT_MAX_ITER: int = 20000
    DEFAULT_ALPHA: float = 0.61
    DEFAULT_BETA_SCALE: float = 1.1
    DEFAULT_TRIALS: int = 10
    PHA_MAX_INNER_ITER: int = 20000

    OUTPUT_DIR: str = "out"
    # tope N*ell del árbol de caminatas aleatorias (2**(N*ell) átomos)
    SOCP_MAX_STEPS: int = 22
    TRACE_LOG_EVERY: int = 500

    # indica dónde leer .env en local
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra='ignore'
    )

settings = Settings()
