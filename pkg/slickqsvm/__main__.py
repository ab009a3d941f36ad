from slickqsvm.main import main

main()
