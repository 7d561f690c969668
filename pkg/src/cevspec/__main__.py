from cevspec.cli import main

main()
