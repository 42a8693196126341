from disequilibrium.main import run

run()
