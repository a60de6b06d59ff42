from dotenv import load_dotenv

load_dotenv()

from app.cli import cli  # noqa: E402

if __name__ == '__main__':
    cli()
