from slstream.cli import run

run()
