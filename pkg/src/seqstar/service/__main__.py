"""Run the verification service: python -m seqstar.service [--port N]."""

import argparse

import uvicorn


def main():
    parser = argparse.ArgumentParser(description="seqstar verification service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8100)
    args = parser.parse_args()
    uvicorn.run("seqstar.service.app:app", host=args.host, port=args.port,
                log_level="warning")


if __name__ == "__main__":
    main()
