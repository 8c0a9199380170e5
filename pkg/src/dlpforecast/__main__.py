from dlpforecast.cli import run

run()
