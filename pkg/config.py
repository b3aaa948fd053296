from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    DATABASE_URL: str = "sqlite:///./arith.db"
    LOG_LEVEL: str = "INFO"
    DEFAULT_SEED: int = 0
    MAX_VOCABULARY: int = 256
    API_MAX_EXAMPLES: int = 1000

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "extra": "ignore"}


settings = Settings()
